#pragma once

#include <algorithm>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "events.hpp"
#include "scoring.hpp"

namespace adctf {

struct MatchSummary {
    std::string match_id;
    std::vector<int> teams; // first entry is "team A" in outcome tables
    std::vector<std::string> machines;
    TeamMachineTotals totals; // replayed from score records
    std::optional<EndReason> end_reason;
    int rounds_completed = 0;
    bool complete = false;
};

inline MatchSummary summarize_match(const std::vector<MatchEvent>& events) {
    MatchSummary s;
    for (const auto& ev : events) {
        if (const auto* started = std::get_if<MatchStartedEvent>(&ev)) {
            s.match_id = started->match_id;
            s.teams = started->teams;
            s.machines = started->machines;
        } else if (const auto* ended = std::get_if<MatchEndedEvent>(&ev)) {
            s.end_reason = ended->reason;
            s.rounds_completed = ended->rounds_completed;
            s.complete = true;
        }
    }
    s.totals = replay_totals(events);
    return s;
}

inline int machine_total(const MatchSummary& s, int team, const std::string& machine) {
    auto it = s.totals.find({team, machine});
    return it == s.totals.end() ? 0 : it->second;
}

inline std::vector<MachineOutcome> machine_outcomes(const MatchSummary& s) {
    std::vector<MachineOutcome> out;
    if (s.teams.size() != 2) return out;
    for (const auto& machine : s.machines)
        out.push_back(MachineOutcome{
            machine, determine_outcome(machine_total(s, s.teams[0], machine),
                                       machine_total(s, s.teams[1], machine))});
    return out;
}

struct WtlRow {
    std::string match_id;
    std::vector<MachineOutcome> outcomes;
    WtlPercent percent;
};

struct WtlReport {
    std::vector<WtlRow> rows;
    std::vector<std::string> skipped; // incomplete logs, by match id or path
};

// Per-machine outcomes plus the aggregate W-T-L percentages; incomplete
// matches are excluded with a warning entry.
inline WtlReport report_wtl(const std::vector<MatchSummary>& matches) {
    WtlReport report;
    for (const auto& m : matches) {
        if (!m.complete) {
            report.skipped.push_back(m.match_id.empty() ? "<unknown>" : m.match_id);
            continue;
        }
        WtlRow row;
        row.match_id = m.match_id;
        row.outcomes = machine_outcomes(m);
        row.percent = aggregate_wtl(row.outcomes);
        report.rows.push_back(std::move(row));
    }
    return report;
}

inline std::string wtl_to_text(const WtlReport& report) {
    std::ostringstream out;
    for (const auto& row : report.rows) {
        out << "match " << row.match_id << "\n";
        for (const auto& o : row.outcomes)
            out << "  " << std::left << std::setw(20) << o.machine << " "
                << to_string(o.result_for_team_a) << "\n";
        out << "  W/T/L %: " << row.percent.win << " / " << row.percent.tie << " / "
            << row.percent.loss << "\n";
    }
    for (const auto& s : report.skipped) out << "warning: skipped incomplete match " << s << "\n";
    return out.str();
}

inline nlohmann::json wtl_to_json(const WtlReport& report) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : report.rows) {
        nlohmann::json outcomes = nlohmann::json::array();
        for (const auto& o : row.outcomes)
            outcomes.push_back({{"machine", o.machine}, {"result_for_team_a", to_string(o.result_for_team_a)}});
        rows.push_back({{"match_id", row.match_id},
                        {"outcomes", std::move(outcomes)},
                        {"wtl_percent",
                         {{"win", row.percent.win}, {"tie", row.percent.tie}, {"loss", row.percent.loss}}}});
    }
    return {{"matches", std::move(rows)}, {"skipped", report.skipped}};
}

struct TeamScoreRow {
    int team = 0;
    std::map<std::string, int> per_machine;
    int total = 0;
};

struct ScoreDistribution {
    struct PerMatch {
        std::string match_id;
        std::vector<TeamScoreRow> teams;
        int match_total = 0;
    };
    std::vector<PerMatch> matches;
    std::vector<std::string> skipped;
    // Two normalizations of "share of total game points", labeled because they
    // differ once matches have different point volumes.
    std::map<int, double> share_of_sums;   // team total across matches / grand total
    std::map<int, double> mean_of_shares;  // mean over matches of per-match share
};

inline ScoreDistribution report_score_distribution(const std::vector<MatchSummary>& matches) {
    ScoreDistribution dist;
    std::map<int, double> sum_points;
    std::map<int, double> share_acc;
    std::map<int, int> share_n;
    for (const auto& m : matches) {
        if (!m.complete) {
            dist.skipped.push_back(m.match_id.empty() ? "<unknown>" : m.match_id);
            continue;
        }
        ScoreDistribution::PerMatch pm;
        pm.match_id = m.match_id;
        for (int team : m.teams) {
            TeamScoreRow row;
            row.team = team;
            for (const auto& machine : m.machines) {
                int points = machine_total(m, team, machine);
                row.per_machine[machine] = points;
                row.total += points;
            }
            pm.match_total += row.total;
            pm.teams.push_back(std::move(row));
        }
        for (const auto& row : pm.teams) {
            sum_points[row.team] += row.total;
            if (pm.match_total != 0) {
                share_acc[row.team] += 100.0 * row.total / pm.match_total;
                share_n[row.team] += 1;
            }
        }
        dist.matches.push_back(std::move(pm));
    }
    double grand = 0;
    for (const auto& [team, pts] : sum_points) grand += pts;
    for (const auto& [team, pts] : sum_points)
        dist.share_of_sums[team] = grand != 0 ? 100.0 * pts / grand : 0.0;
    for (const auto& [team, acc] : share_acc)
        dist.mean_of_shares[team] = share_n[team] ? acc / share_n[team] : 0.0;
    return dist;
}

inline std::string scores_to_text(const ScoreDistribution& dist) {
    std::ostringstream out;
    for (const auto& pm : dist.matches) {
        out << "match " << pm.match_id << " (total " << pm.match_total << ")\n";
        for (const auto& row : pm.teams) {
            out << "  team " << row.team << ": total " << row.total << " [";
            bool first = true;
            for (const auto& [machine, pts] : row.per_machine) {
                if (!first) out << ", ";
                out << machine << " " << pts;
                first = false;
            }
            out << "]\n";
        }
    }
    out << std::fixed << std::setprecision(1);
    for (const auto& [team, share] : dist.share_of_sums)
        out << "team " << team << " share of summed points: " << share << "%\n";
    for (const auto& [team, share] : dist.mean_of_shares)
        out << "team " << team << " mean per-match share:   " << share << "%\n";
    for (const auto& s : dist.skipped) out << "warning: skipped incomplete match " << s << "\n";
    return out.str();
}

inline nlohmann::json scores_to_json(const ScoreDistribution& dist) {
    nlohmann::json matches = nlohmann::json::array();
    for (const auto& pm : dist.matches) {
        nlohmann::json teams = nlohmann::json::array();
        for (const auto& row : pm.teams)
            teams.push_back(
                {{"team", row.team}, {"per_machine", row.per_machine}, {"total", row.total}});
        matches.push_back({{"match_id", pm.match_id},
                           {"teams", std::move(teams)},
                           {"match_total", pm.match_total}});
    }
    nlohmann::json shares_sum = nlohmann::json::object();
    for (const auto& [team, share] : dist.share_of_sums) shares_sum[std::to_string(team)] = share;
    nlohmann::json shares_mean = nlohmann::json::object();
    for (const auto& [team, share] : dist.mean_of_shares) shares_mean[std::to_string(team)] = share;
    return {{"matches", std::move(matches)},
            {"share_of_sums_percent", std::move(shares_sum)},
            {"mean_of_shares_percent", std::move(shares_mean)},
            {"skipped", dist.skipped}};
}

} // namespace adctf
