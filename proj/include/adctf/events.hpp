#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "scoring.hpp"
#include "status.hpp"
#include "time.hpp"

namespace adctf {

enum class EndReason { RootSweep, TimeLimit, ManualStop };

inline const char* to_string(EndReason r) {
    switch (r) {
    case EndReason::RootSweep: return "ROOT_SWEEP";
    case EndReason::TimeLimit: return "TIME_LIMIT";
    case EndReason::ManualStop: return "MANUAL_STOP";
    }
    return "MANUAL_STOP";
}

inline std::optional<EndReason> end_reason_from_string(const std::string& s) {
    if (s == "ROOT_SWEEP") return EndReason::RootSweep;
    if (s == "TIME_LIMIT") return EndReason::TimeLimit;
    if (s == "MANUAL_STOP") return EndReason::ManualStop;
    return std::nullopt;
}

struct MatchStartedEvent {
    millis at = 0;
    std::string match_id;
    std::vector<int> teams;
    std::vector<std::string> machines;
    millis round_interval_ms = 0;
    millis time_limit_ms = 0;
};

// Emitted only when a (team, machine) status differs from the previous round.
struct StatusChangeEvent {
    millis at = 0;
    int round = 0;
    int team = 0;
    std::string machine;
    Verdict from = Verdict::Ok;
    Verdict to = Verdict::Ok;
};

struct FlagCaptureEvent {
    millis at = 0;
    int team = 0; // captor
    int victim_team = 0;
    std::string machine;
    FlagKind flag_kind = FlagKind::User;
};

struct ScoreAppliedEvent {
    ScoreEvent score;
};

struct MatchEndedEvent {
    millis at = 0;
    EndReason reason = EndReason::ManualStop;
    int rounds_completed = 0;
    // final totals as reported live by the engine, keyed team -> machine -> points
    std::map<int, std::map<std::string, int>> totals;
};

using MatchEvent = std::variant<MatchStartedEvent, StatusChangeEvent, FlagCaptureEvent,
                                ScoreAppliedEvent, MatchEndedEvent>;

struct LogParseError : std::runtime_error {
    LogParseError(std::size_t line, const std::string& why)
        : std::runtime_error("event log line " + std::to_string(line) + ": " + why), line_no(line) {}
    std::size_t line_no;
};

namespace detail {

inline nlohmann::json event_to_json(const MatchStartedEvent& e) {
    return {{"event", "match_started"},
            {"at", rfc3339_utc(e.at)},
            {"match_id", e.match_id},
            {"teams", e.teams},
            {"machines", e.machines},
            {"round_interval_ms", e.round_interval_ms},
            {"time_limit_ms", e.time_limit_ms}};
}

inline nlohmann::json event_to_json(const StatusChangeEvent& e) {
    return {{"event", "status_change"},
            {"at", rfc3339_utc(e.at)},
            {"round", e.round},
            {"team", e.team},
            {"machine", e.machine},
            {"from", to_string(e.from)},
            {"to", to_string(e.to)}};
}

inline nlohmann::json event_to_json(const FlagCaptureEvent& e) {
    return {{"event", "flag_capture"},
            {"at", rfc3339_utc(e.at)},
            {"team", e.team},
            {"victim_team", e.victim_team},
            {"machine", e.machine},
            {"flag_kind", to_string(e.flag_kind)}};
}

inline nlohmann::json event_to_json(const ScoreAppliedEvent& e) {
    nlohmann::json j{{"event", "score_applied"},
                     {"at", rfc3339_utc(e.score.at)},
                     {"team", e.score.team},
                     {"machine", e.score.machine},
                     {"kind", to_string(e.score.kind)},
                     {"delta", e.score.delta}};
    j["round"] = e.score.round ? nlohmann::json(*e.score.round) : nlohmann::json(nullptr);
    return j;
}

inline nlohmann::json event_to_json(const MatchEndedEvent& e) {
    nlohmann::json totals = nlohmann::json::object();
    for (const auto& [team, machines] : e.totals) {
        nlohmann::json per = nlohmann::json::object();
        for (const auto& [machine, points] : machines) per[machine] = points;
        totals[std::to_string(team)] = std::move(per);
    }
    return {{"event", "match_ended"},
            {"at", rfc3339_utc(e.at)},
            {"end_reason", to_string(e.reason)},
            {"rounds_completed", e.rounds_completed},
            {"totals", std::move(totals)}};
}

} // namespace detail

inline nlohmann::json to_json(const MatchEvent& ev) {
    return std::visit([](const auto& e) { return detail::event_to_json(e); }, ev);
}

// One event per line; nlohmann objects keep keys sorted, so serialization is
// byte-stable for identical event sequences.
inline std::string to_jsonl_line(const MatchEvent& ev) { return to_json(ev).dump(); }

inline millis event_time(const MatchEvent& ev) {
    return std::visit(
        [](const auto& e) -> millis {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, ScoreAppliedEvent>)
                return e.score.at;
            else
                return e.at;
        },
        ev);
}

namespace detail {

inline millis parse_at(const nlohmann::json& j, std::size_t line) {
    auto t = parse_rfc3339_utc(j.at("at").get<std::string>());
    if (!t) throw LogParseError(line, "bad timestamp: " + j.at("at").dump());
    return *t;
}

} // namespace detail

inline MatchEvent parse_event_line(const std::string& line, std::size_t line_no = 0) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw LogParseError(line_no, std::string("invalid JSON: ") + e.what());
    }
    try {
        const std::string kind = j.at("event").get<std::string>();
        if (kind == "match_started") {
            MatchStartedEvent e;
            e.at = detail::parse_at(j, line_no);
            e.match_id = j.at("match_id").get<std::string>();
            e.teams = j.at("teams").get<std::vector<int>>();
            e.machines = j.at("machines").get<std::vector<std::string>>();
            e.round_interval_ms = j.value("round_interval_ms", millis{0});
            e.time_limit_ms = j.value("time_limit_ms", millis{0});
            return e;
        }
        if (kind == "status_change") {
            StatusChangeEvent e;
            e.at = detail::parse_at(j, line_no);
            e.round = j.at("round").get<int>();
            e.team = j.at("team").get<int>();
            e.machine = j.at("machine").get<std::string>();
            auto from = verdict_from_string(j.at("from").get<std::string>());
            auto to = verdict_from_string(j.at("to").get<std::string>());
            if (!from || !to) throw LogParseError(line_no, "unknown status name");
            e.from = *from;
            e.to = *to;
            return e;
        }
        if (kind == "flag_capture") {
            FlagCaptureEvent e;
            e.at = detail::parse_at(j, line_no);
            e.team = j.at("team").get<int>();
            e.victim_team = j.at("victim_team").get<int>();
            e.machine = j.at("machine").get<std::string>();
            auto fk = flag_kind_from_string(j.at("flag_kind").get<std::string>());
            if (!fk) throw LogParseError(line_no, "unknown flag kind");
            e.flag_kind = *fk;
            return e;
        }
        if (kind == "score_applied") {
            ScoreAppliedEvent e;
            e.score.at = detail::parse_at(j, line_no);
            e.score.team = j.at("team").get<int>();
            e.score.machine = j.at("machine").get<std::string>();
            auto sk = score_kind_from_string(j.at("kind").get<std::string>());
            if (!sk) throw LogParseError(line_no, "unknown score kind");
            e.score.kind = *sk;
            e.score.delta = j.at("delta").get<int>();
            if (!j.at("round").is_null()) e.score.round = j.at("round").get<int>();
            return e;
        }
        if (kind == "match_ended") {
            MatchEndedEvent e;
            e.at = detail::parse_at(j, line_no);
            auto reason = end_reason_from_string(j.at("end_reason").get<std::string>());
            if (!reason) throw LogParseError(line_no, "unknown end reason");
            e.reason = *reason;
            e.rounds_completed = j.value("rounds_completed", 0);
            for (const auto& [team_str, per] : j.at("totals").items())
                for (const auto& [machine, points] : per.items())
                    e.totals[std::stoi(team_str)][machine] = points.get<int>();
            return e;
        }
        throw LogParseError(line_no, "unknown event type: " + kind);
    } catch (const nlohmann::json::exception& e) {
        throw LogParseError(line_no, std::string("missing or mistyped field: ") + e.what());
    }
}

// Append-only in-memory log with an optional file sink flushed per event.
class EventLog {
public:
    EventLog() = default;

    void open_sink(const std::string& path) {
        sink_.open(path, std::ios::out | std::ios::trunc);
        if (!sink_) throw std::runtime_error("cannot open event log sink: " + path);
        for (const auto& ev : events_) sink_ << to_jsonl_line(ev) << '\n';
        sink_.flush();
    }

    void append(MatchEvent ev) {
        if (sink_.is_open()) {
            sink_ << to_jsonl_line(ev) << '\n';
            sink_.flush();
        }
        events_.push_back(std::move(ev));
    }

    const std::vector<MatchEvent>& events() const { return events_; }

    std::string serialize() const {
        std::string out;
        for (const auto& ev : events_) {
            out += to_jsonl_line(ev);
            out += '\n';
        }
        return out;
    }

private:
    std::vector<MatchEvent> events_;
    std::ofstream sink_;
};

inline std::vector<MatchEvent> parse_event_log(std::istream& in) {
    std::vector<MatchEvent> events;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        events.push_back(parse_event_line(line, line_no));
    }
    return events;
}

inline std::vector<MatchEvent> parse_event_log(const std::string& text) {
    std::istringstream in(text);
    return parse_event_log(in);
}

inline std::vector<MatchEvent> load_event_log(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open event log: " + path);
    return parse_event_log(in);
}

// Replaying the score_applied records reproduces the live ledger totals.
inline TeamMachineTotals replay_totals(const std::vector<MatchEvent>& events) {
    std::vector<ScoreEvent> scores;
    for (const auto& ev : events)
        if (const auto* s = std::get_if<ScoreAppliedEvent>(&ev)) scores.push_back(s->score);
    return fold_ledger(scores);
}

} // namespace adctf
