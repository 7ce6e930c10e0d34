#pragma once

#include <string>
#include <vector>

#include <adctf/config.hpp>

namespace testutil {

inline adctf::MatchConfig make_config(int machine_count = 2,
                                      adctf::millis interval = 60 * adctf::second_ms,
                                      adctf::millis limit = 20 * adctf::minute_ms) {
    adctf::MatchConfig cfg;
    cfg.match_id = "t";
    cfg.teams = {{1, "alpha", "pw-a"}, {2, "bravo", "pw-b"}};
    for (int i = 0; i < machine_count; ++i) {
        adctf::MachineSpec m;
        m.name = "svc" + std::to_string(i);
        m.difficulty = 1 + i % 5;
        cfg.machines.push_back(std::move(m));
    }
    cfg.round_interval_ms = interval;
    cfg.time_limit_ms = limit;
    cfg.rng_seed = 42;
    return cfg;
}

inline std::string bin_dir() { return ADCTF_BIN_DIR; }
inline std::string source_dir() { return ADCTF_SOURCE_DIR; }
inline std::string stub_checker() { return bin_dir() + "/stub_checker"; }
inline std::string echo_notes_service() { return bin_dir() + "/echo_notes_service"; }
inline std::string echo_notes_checker() { return bin_dir() + "/echo_notes_checker"; }

} // namespace testutil
