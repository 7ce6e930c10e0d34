#pragma once

#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "scoring.hpp"
#include "time.hpp"

namespace adctf {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TeamSpec {
    int id = 0;
    std::string name;
    std::string credentials; // per-team secret handed to its agents
};

struct MachineSpec {
    std::string name;
    int difficulty = 1; // 1..5 stars
    std::string checker;      // checker executable; may be filled from the manifest
    std::string manifest;     // path to the scenario manifest, empty for pure simulation
    std::string service_user = "ctf"; // owner of the user flag's home directory
};

struct NetworkPlan {
    std::string subnet = "192.168.3.0/24";
};

struct MatchConfig {
    std::string match_id = "match";
    std::vector<TeamSpec> teams;
    std::vector<MachineSpec> machines;
    millis round_interval_ms = 60 * second_ms;
    millis time_limit_ms = 20 * minute_ms;
    ScoringConstants scoring;
    std::uint64_t rng_seed = 0;
    NetworkPlan network;
};

// Pairwise matchups only: exactly two teams, at least one machine.
inline void validate(const MatchConfig& cfg) {
    if (cfg.match_id.empty()) throw ConfigError("match_id must not be empty");
    if (cfg.teams.size() != 2) throw ConfigError("match requires exactly 2 teams");
    if (cfg.teams[0].id == cfg.teams[1].id) throw ConfigError("team ids must be distinct");
    if (cfg.machines.empty()) throw ConfigError("match requires at least 1 machine");
    if (cfg.round_interval_ms <= 0) throw ConfigError("round_interval must be positive");
    if (cfg.time_limit_ms < cfg.round_interval_ms)
        throw ConfigError("time_limit must be at least one round_interval");
    std::set<std::string> names;
    for (const auto& m : cfg.machines) {
        if (m.name.empty()) throw ConfigError("machine name must not be empty");
        if (!names.insert(m.name).second) throw ConfigError("duplicate machine name: " + m.name);
        if (m.difficulty < 1 || m.difficulty > 5)
            throw ConfigError("machine " + m.name + ": difficulty must be within 1..5");
    }
}

inline MatchConfig match_config_from_json(const nlohmann::json& j) {
    MatchConfig cfg;
    try {
        cfg.match_id = j.value("match_id", cfg.match_id);
        for (const auto& t : j.at("teams")) {
            TeamSpec ts;
            ts.id = t.at("id").get<int>();
            ts.name = t.value("name", "team-" + std::to_string(ts.id));
            ts.credentials = t.value("credentials", "");
            cfg.teams.push_back(std::move(ts));
        }
        for (const auto& m : j.at("machines")) {
            MachineSpec ms;
            ms.name = m.at("name").get<std::string>();
            ms.difficulty = m.value("difficulty", 1);
            ms.checker = m.value("checker", "");
            ms.manifest = m.value("manifest", "");
            ms.service_user = m.value("service_user", ms.service_user);
            cfg.machines.push_back(std::move(ms));
        }
        cfg.round_interval_ms = static_cast<millis>(j.value("round_interval_s", 60.0) * 1000.0);
        cfg.time_limit_ms = static_cast<millis>(j.value("time_limit_s", 1200.0) * 1000.0);
        if (j.contains("scoring")) {
            const auto& s = j.at("scoring");
            cfg.scoring.user_flag_points = s.value("user_flag_points", 100);
            cfg.scoring.root_flag_points = s.value("root_flag_points", 200);
            cfg.scoring.defense_ok_points = s.value("defense_ok_points", 13);
            cfg.scoring.service_failure_penalty = s.value("service_failure_penalty", -5);
            cfg.scoring.flag_corruption_penalty = s.value("flag_corruption_penalty", -10);
            cfg.scoring.error_delta = s.value("error_delta", 0);
        }
        cfg.rng_seed = j.value("rng_seed", std::uint64_t{0});
        if (j.contains("network_plan"))
            cfg.network.subnet = j.at("network_plan").value("subnet", cfg.network.subnet);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad match config: ") + e.what());
    }
    validate(cfg);
    return cfg;
}

inline MatchConfig load_match_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open match config: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("cannot parse " + path + ": " + e.what());
    }
    return match_config_from_json(j);
}

inline const TeamSpec* find_team(const MatchConfig& cfg, int team_id) {
    for (const auto& t : cfg.teams)
        if (t.id == team_id) return &t;
    return nullptr;
}

inline const MachineSpec* find_machine(const MatchConfig& cfg, const std::string& name) {
    for (const auto& m : cfg.machines)
        if (m.name == name) return &m;
    return nullptr;
}

inline int opponent_of(const MatchConfig& cfg, int team_id) {
    return cfg.teams[0].id == team_id ? cfg.teams[1].id : cfg.teams[0].id;
}

} // namespace adctf
