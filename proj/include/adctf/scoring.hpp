#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "status.hpp"
#include "time.hpp"

namespace adctf {

// Match scoring constants. Configurable per match, immutable while it runs.
struct ScoringConstants {
    int user_flag_points = 100;
    int root_flag_points = 200;
    int defense_ok_points = 13;
    int service_failure_penalty = -5;
    int flag_corruption_penalty = -10;
    int error_delta = 0; // checker faults are the infrastructure's problem, not the team's
};

enum class ScoreKind {
    AttackUser,
    AttackRoot,
    DefenseOk,
    PenaltyFailure,
    PenaltyCorruption,
    CheckerError,
};

inline const char* to_string(ScoreKind k) {
    switch (k) {
    case ScoreKind::AttackUser: return "ATTACK_USER";
    case ScoreKind::AttackRoot: return "ATTACK_ROOT";
    case ScoreKind::DefenseOk: return "DEFENSE_OK";
    case ScoreKind::PenaltyFailure: return "PENALTY_FAILURE";
    case ScoreKind::PenaltyCorruption: return "PENALTY_CORRUPTION";
    case ScoreKind::CheckerError: return "CHECKER_ERROR";
    }
    return "CHECKER_ERROR";
}

inline std::optional<ScoreKind> score_kind_from_string(const std::string& s) {
    for (ScoreKind k : {ScoreKind::AttackUser, ScoreKind::AttackRoot, ScoreKind::DefenseOk,
                        ScoreKind::PenaltyFailure, ScoreKind::PenaltyCorruption,
                        ScoreKind::CheckerError})
        if (s == to_string(k)) return k;
    return std::nullopt;
}

// The delta is a function of kind and constants alone; there are no free-form deltas.
inline int delta_for(ScoreKind k, const ScoringConstants& c) {
    switch (k) {
    case ScoreKind::AttackUser: return c.user_flag_points;
    case ScoreKind::AttackRoot: return c.root_flag_points;
    case ScoreKind::DefenseOk: return c.defense_ok_points;
    case ScoreKind::PenaltyFailure: return c.service_failure_penalty;
    case ScoreKind::PenaltyCorruption: return c.flag_corruption_penalty;
    case ScoreKind::CheckerError: return c.error_delta;
    }
    return 0;
}

struct ScoreEvent {
    int team = 0;
    std::string machine;
    std::optional<int> round; // flag captures are round-independent
    ScoreKind kind = ScoreKind::CheckerError;
    int delta = 0;
    millis at = 0;
};

inline ScoreEvent make_score_event(int team, std::string machine, std::optional<int> round,
                                   ScoreKind kind, const ScoringConstants& c, millis at) {
    return ScoreEvent{team, std::move(machine), round, kind, delta_for(kind, c), at};
}

// One defense-or-penalty event per (team, machine, round). CORRUPT replaces
// all other round scoring with the corruption penalty; ERROR scores zero but
// is still recorded for audit.
inline ScoreKind round_score_kind(Verdict v) {
    switch (v) {
    case Verdict::Ok: return ScoreKind::DefenseOk;
    case Verdict::Mumble: return ScoreKind::PenaltyFailure;
    case Verdict::Down: return ScoreKind::PenaltyFailure;
    case Verdict::Corrupt: return ScoreKind::PenaltyCorruption;
    case Verdict::Error: return ScoreKind::CheckerError;
    }
    return ScoreKind::CheckerError;
}

inline ScoreEvent score_round(int team, const std::string& machine, int round, Verdict status,
                              const ScoringConstants& c, millis at) {
    return make_score_event(team, machine, round, round_score_kind(status), c, at);
}

enum class FlagKind { User, Root };

inline const char* to_string(FlagKind k) { return k == FlagKind::User ? "USER" : "ROOT"; }

inline std::optional<FlagKind> flag_kind_from_string(const std::string& s) {
    if (s == "USER") return FlagKind::User;
    if (s == "ROOT") return FlagKind::Root;
    return std::nullopt;
}

// Awarded exactly once per flag; the flag store gates repeat captures.
inline ScoreEvent score_flag_capture(int team, const std::string& machine, FlagKind kind,
                                     const ScoringConstants& c, millis at) {
    ScoreKind sk = kind == FlagKind::User ? ScoreKind::AttackUser : ScoreKind::AttackRoot;
    return make_score_event(team, machine, std::nullopt, sk, c, at);
}

// Append-only ordered list of score events. Single writer; copies are cheap
// snapshots safe to fold concurrently.
class ScoreLedger {
public:
    void append(ScoreEvent ev) { events_.push_back(std::move(ev)); }

    const std::vector<ScoreEvent>& events() const { return events_; }
    std::size_t size() const { return events_.size(); }

private:
    std::vector<ScoreEvent> events_;
};

using TeamMachineTotals = std::map<std::pair<int, std::string>, int>;

// Pure fold; order-independent because addition commutes.
inline TeamMachineTotals fold_ledger(const std::vector<ScoreEvent>& events) {
    TeamMachineTotals totals;
    for (const auto& ev : events) totals[{ev.team, ev.machine}] += ev.delta;
    return totals;
}

inline TeamMachineTotals fold_ledger(const ScoreLedger& ledger) {
    return fold_ledger(ledger.events());
}

inline int total_for_team(const TeamMachineTotals& totals, int team) {
    int sum = 0;
    for (const auto& [key, v] : totals)
        if (key.first == team) sum += v;
    return sum;
}

enum class Outcome { Win, Tie, Loss };

inline const char* to_string(Outcome o) {
    switch (o) {
    case Outcome::Win: return "WIN";
    case Outcome::Tie: return "TIE";
    case Outcome::Loss: return "LOSS";
    }
    return "TIE";
}

inline Outcome mirror(Outcome o) {
    if (o == Outcome::Win) return Outcome::Loss;
    if (o == Outcome::Loss) return Outcome::Win;
    return Outcome::Tie;
}

// Per-machine result for the first team, by strict comparison of final totals.
inline Outcome determine_outcome(int total_a, int total_b) {
    if (total_a > total_b) return Outcome::Win;
    if (total_a < total_b) return Outcome::Loss;
    return Outcome::Tie;
}

struct MachineOutcome {
    std::string machine;
    Outcome result_for_team_a = Outcome::Tie;
};

struct WtlPercent {
    int win = 0;
    int tie = 0;
    int loss = 0;
};

// Integer percentages, rounded half away from zero.
inline WtlPercent aggregate_wtl(const std::vector<MachineOutcome>& outcomes) {
    if (outcomes.empty()) throw std::invalid_argument("no outcomes");
    int w = 0, t = 0, l = 0;
    for (const auto& o : outcomes) {
        switch (o.result_for_team_a) {
        case Outcome::Win: ++w; break;
        case Outcome::Tie: ++t; break;
        case Outcome::Loss: ++l; break;
        }
    }
    const double n = static_cast<double>(outcomes.size());
    auto pct = [n](int count) { return static_cast<int>(std::lround(100.0 * count / n)); };
    return WtlPercent{pct(w), pct(t), pct(l)};
}

} // namespace adctf
