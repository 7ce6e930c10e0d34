#pragma once

#include <algorithm>
#include <fstream>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <json.hpp>

#include "engine.hpp"
#include "events.hpp"

namespace adctf {

enum class BotRole { Red, Blue };

struct FlagRef {
    int team = 0;
    std::string machine;
    FlagKind kind = FlagKind::User;
};

// Red bots only submit; blue bots only mutate their own service's scripted
// state.
struct SubmitAction {
    std::optional<FlagRef> flag_of; // resolved against the generated flags
    std::string literal_token;     // used when flag_of is absent
};

struct SetStatusAction {
    Verdict status = Verdict::Ok;
};

struct BotAction {
    millis at_ms = 0; // offset from match start
    std::variant<SubmitAction, SetStatusAction> action;
};

struct BotScript {
    int team = 0;
    BotRole role = BotRole::Red;
    std::string machine; // blue bots name the service they degrade/patch
    std::vector<BotAction> actions;
};

struct ScriptError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void validate_scripts(const MatchConfig& cfg, const std::vector<BotScript>& scripts) {
    for (const auto& s : scripts) {
        if (!find_team(cfg, s.team)) throw ScriptError("script for unknown team " + std::to_string(s.team));
        if (s.role == BotRole::Blue && !find_machine(cfg, s.machine))
            throw ScriptError("blue script for unknown machine: " + s.machine);
        millis prev = 0;
        for (const auto& a : s.actions) {
            if (a.at_ms < prev) throw ScriptError("script offsets must be non-decreasing");
            prev = a.at_ms;
            if (s.role == BotRole::Red && !std::holds_alternative<SubmitAction>(a.action))
                throw ScriptError("red bots may only submit flags");
            if (s.role == BotRole::Blue && !std::holds_alternative<SetStatusAction>(a.action))
                throw ScriptError("blue bots may only change their own service state");
            if (const auto* sub = std::get_if<SubmitAction>(&a.action)) {
                if (sub->flag_of && !find_machine(cfg, sub->flag_of->machine))
                    throw ScriptError("script references unknown machine: " + sub->flag_of->machine);
                if (sub->flag_of && !find_team(cfg, sub->flag_of->team))
                    throw ScriptError("script references unknown team " +
                                      std::to_string(sub->flag_of->team));
            }
        }
    }
}

inline std::vector<BotScript> scripts_from_json(const nlohmann::json& j) {
    std::vector<BotScript> scripts;
    try {
        for (const auto& b : j.at("bots")) {
            BotScript s;
            s.team = b.at("team").get<int>();
            const std::string role = b.at("role").get<std::string>();
            if (role == "red")
                s.role = BotRole::Red;
            else if (role == "blue")
                s.role = BotRole::Blue;
            else
                throw ScriptError("bot role must be red or blue");
            s.machine = b.value("machine", "");
            for (const auto& a : b.value("actions", nlohmann::json::array())) {
                BotAction act;
                act.at_ms = static_cast<millis>(a.at("at_s").get<double>() * 1000.0);
                if (a.contains("submit_flag_of")) {
                    const auto& ref = a.at("submit_flag_of");
                    FlagRef fr;
                    fr.team = ref.at("team").get<int>();
                    fr.machine = ref.at("machine").get<std::string>();
                    auto kind = flag_kind_from_string(ref.at("kind").get<std::string>());
                    if (!kind) throw ScriptError("flag kind must be USER or ROOT");
                    fr.kind = *kind;
                    act.action = SubmitAction{fr, ""};
                } else if (a.contains("submit_token")) {
                    act.action = SubmitAction{std::nullopt, a.at("submit_token").get<std::string>()};
                } else if (a.contains("set_status")) {
                    auto v = verdict_from_string(a.at("set_status").get<std::string>());
                    if (!v) throw ScriptError("unknown status in set_status");
                    act.action = SetStatusAction{*v};
                } else {
                    throw ScriptError("action must be submit_flag_of, submit_token or set_status");
                }
                s.actions.push_back(std::move(act));
            }
            scripts.push_back(std::move(s));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ScriptError(std::string("bad bot script: ") + e.what());
    }
    return scripts;
}

inline std::vector<BotScript> load_scripts(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScriptError("cannot open scripts file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ScriptError("cannot parse " + path + ": " + e.what());
    }
    return scripts_from_json(j);
}

struct SimResult {
    std::string log;
    TeamMachineTotals totals;
    std::optional<EndReason> end_reason;
    int rounds_completed = 0;
    std::vector<SubmissionRecord> submissions;
};

// Plays a full match under a virtual clock: rounds, bot actions and
// termination interleave in timestamp order with a fixed tie-break
// (time limit, then bot actions, then the round tick), so identical
// (config, scripts, seed) produce byte-identical logs. time_scale >= 1 only
// paces wall-clock replay; it never changes virtual time.
inline SimResult run_simulated_match(const MatchConfig& cfg, const std::vector<BotScript>& scripts,
                                     double time_scale = 1e9,
                                     const std::string& sink_path = "") {
    if (time_scale < 1.0) throw ScriptError("time_scale must be >= 1");
    validate(cfg);
    validate_scripts(cfg, scripts);

    VirtualClock clock;
    Engine engine(cfg, clock);
    if (!sink_path.empty()) engine.open_log_sink(sink_path);
    SimEnvironment env;
    engine.start(env);
    const millis start = engine.started_at();

    // Resolve flag references against the freshly generated flags.
    struct QueuedAction {
        millis at = 0;
        std::size_t seq = 0;
        const BotScript* script = nullptr;
        const BotAction* action = nullptr;
    };
    std::map<std::tuple<int, std::string, FlagKind>, std::string> tokens;
    for (const auto& f : engine.flag_store().flags()) tokens[{f.owner_team, f.machine, f.kind}] = f.token;

    std::vector<QueuedAction> queue;
    std::size_t seq = 0;
    for (const auto& s : scripts)
        for (const auto& a : s.actions) queue.push_back({start + a.at_ms, seq++, &s, &a});
    std::stable_sort(queue.begin(), queue.end(), [](const QueuedAction& a, const QueuedAction& b) {
        return std::tie(a.at, a.seq) < std::tie(b.at, b.seq);
    });

    auto pace = [&](millis to) {
        if (time_scale >= 1e9) return;
        millis wall = static_cast<millis>((to - clock.now_ms()) / time_scale);
        if (wall > 0) std::this_thread::sleep_for(std::chrono::milliseconds(wall));
    };

    auto apply = [&](const QueuedAction& q) {
        if (const auto* sub = std::get_if<SubmitAction>(&q.action->action)) {
            std::string token = sub->literal_token;
            if (sub->flag_of) {
                auto it = tokens.find({sub->flag_of->team, sub->flag_of->machine, sub->flag_of->kind});
                if (it != tokens.end()) token = it->second;
            }
            engine.submit_flag(q.script->team, token);
        } else if (const auto* st = std::get_if<SetStatusAction>(&q.action->action)) {
            env.scripted().set_status(q.script->team, q.script->machine, st->status);
        }
    };

    std::size_t qi = 0;
    while (engine.phase() == MatchPhase::Running) {
        const millis end_at = engine.ends_at();
        auto tick = engine.next_round_at();
        millis t = end_at;
        if (qi < queue.size()) t = std::min(t, queue[qi].at);
        if (tick) t = std::min(t, *tick);

        pace(t);
        if (t > clock.now_ms()) clock.advance_to(t);

        if (t >= end_at) {
            engine.enforce_time_limit();
            break;
        }
        while (qi < queue.size() && queue[qi].at <= t && engine.phase() == MatchPhase::Running)
            apply(queue[qi++]);
        if (engine.phase() != MatchPhase::Running) break;
        if (tick && *tick == t) engine.run_next_round(env.backend());
    }
    engine.enforce_time_limit();

    // Post-end submissions still land in the audit trail, unscored.
    for (; qi < queue.size(); ++qi)
        if (std::holds_alternative<SubmitAction>(queue[qi].action->action)) {
            if (queue[qi].at > clock.now_ms()) clock.advance_to(queue[qi].at);
            apply(queue[qi]);
        }

    SimResult result;
    result.log = engine.serialized_log();
    result.totals = engine.totals();
    result.end_reason = engine.end_reason();
    result.rounds_completed = engine.current_round();
    result.submissions = engine.flag_store().submissions();
    return result;
}

// Deterministic pseudo-random bots: red bots fire a mix of valid enemy
// references, self flags, duplicates and garbage; blue bots wobble their own
// services through degrade/patch cycles.
inline std::vector<BotScript> make_random_scripts(const MatchConfig& cfg, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto rand_between = [&rng](millis lo, millis hi) {
        return lo + static_cast<millis>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
    };
    std::vector<BotScript> scripts;
    for (const auto& team : cfg.teams) {
        BotScript red;
        red.team = team.id;
        red.role = BotRole::Red;
        const int submissions = 1 + static_cast<int>(rng() % 8);
        std::vector<millis> times;
        for (int i = 0; i < submissions; ++i) times.push_back(rand_between(0, cfg.time_limit_ms));
        std::sort(times.begin(), times.end());
        for (millis t : times) {
            BotAction act;
            act.at_ms = t;
            const auto& machine = cfg.machines[rng() % cfg.machines.size()];
            const int roll = static_cast<int>(rng() % 10);
            if (roll < 5) {
                act.action = SubmitAction{
                    FlagRef{opponent_of(cfg, team.id), machine.name,
                            rng() % 2 ? FlagKind::Root : FlagKind::User},
                    ""};
            } else if (roll < 7) {
                act.action = SubmitAction{
                    FlagRef{team.id, machine.name, rng() % 2 ? FlagKind::Root : FlagKind::User}, ""};
            } else {
                act.action = SubmitAction{std::nullopt, "FLAG{bogus-" + std::to_string(rng() % 100) + "}"};
            }
            red.actions.push_back(std::move(act));
        }
        scripts.push_back(std::move(red));

        for (const auto& machine : cfg.machines) {
            if (rng() % 3 == 0) continue; // some services never wobble
            BotScript blue;
            blue.team = team.id;
            blue.role = BotRole::Blue;
            blue.machine = machine.name;
            millis t = 0;
            const int cycles = 1 + static_cast<int>(rng() % 3);
            for (int i = 0; i < cycles && t < cfg.time_limit_ms; ++i) {
                t = rand_between(t, cfg.time_limit_ms);
                BotAction degrade;
                degrade.at_ms = t;
                const Verdict bad[] = {Verdict::Down, Verdict::Mumble, Verdict::Corrupt};
                degrade.action = SetStatusAction{bad[rng() % 3]};
                blue.actions.push_back(degrade);
                t = rand_between(t, cfg.time_limit_ms);
                BotAction patch;
                patch.at_ms = t;
                patch.action = SetStatusAction{Verdict::Ok};
                blue.actions.push_back(patch);
            }
            scripts.push_back(std::move(blue));
        }
    }
    return scripts;
}

} // namespace adctf
