#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "checker.hpp"
#include "config.hpp"
#include "events.hpp"
#include "flag.hpp"
#include "scoring.hpp"
#include "time.hpp"

namespace adctf {

enum class MatchPhase { Configured, Provisioning, Running, Ended };

inline const char* to_string(MatchPhase p) {
    switch (p) {
    case MatchPhase::Configured: return "CONFIGURED";
    case MatchPhase::Provisioning: return "PROVISIONING";
    case MatchPhase::Running: return "RUNNING";
    case MatchPhase::Ended: return "ENDED";
    }
    return "CONFIGURED";
}

struct StartError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// What the engine needs from the world to start a match. Implementations:
// container-backed environments for live matches, a scripted stub for
// simulation.
class MatchEnvironment {
public:
    virtual ~MatchEnvironment() = default;
    virtual void provision() = 0;
    virtual std::vector<std::string> place(const std::vector<Flag>& flags) = 0; // placement failures
    virtual CheckBackend& backend() = 0;
    virtual void teardown() = 0;
};

// Environment for simulated matches: no containers, verdicts come from the
// scripted table.
class SimEnvironment final : public MatchEnvironment {
public:
    void provision() override {}
    std::vector<std::string> place(const std::vector<Flag>&) override { return {}; }
    CheckBackend& backend() override { return backend_; }
    void teardown() override {}

    ScriptedCheckBackend& scripted() { return backend_; }

private:
    ScriptedCheckBackend backend_;
};

struct MachineStatusEntry {
    std::string machine;
    Verdict status = Verdict::Ok;
    int score = 0;
};

struct TeamStatusEntry {
    int team_id = 0;
    std::string name;
    int total = 0;
    std::vector<MachineStatusEntry> machines;
};

struct StatusSnapshot {
    std::string match_id;
    MatchPhase phase = MatchPhase::Configured;
    int current_round = 0;
    std::optional<EndReason> end_reason;
    std::vector<TeamStatusEntry> teams;
};

// Match lifecycle engine. All state mutations serialize through one lock, so
// rounds, submissions and stops apply in a single total order; status reads
// serve a prebuilt snapshot and never wait on scoring.
class Engine {
public:
    Engine(MatchConfig cfg, Clock& clock) : cfg_(std::move(cfg)), clock_(clock) {
        validate(cfg_);
        rebuild_snapshot();
    }

    const MatchConfig& config() const { return cfg_; }

    void open_log_sink(const std::string& path) {
        std::lock_guard lock(mu_);
        log_.open_sink(path);
    }

    // CONFIGURED -> PROVISIONING -> RUNNING, or revert with a diagnostic and
    // zero events on any provisioning/placement failure.
    void start(MatchEnvironment& env) {
        std::lock_guard lock(mu_);
        if (phase_ != MatchPhase::Configured)
            throw StartError("match already started (phase " + std::string(to_string(phase_)) + ")");
        phase_ = MatchPhase::Provisioning;
        rebuild_snapshot();
        try {
            env.provision();
            auto flags = generate_flags(cfg_, cfg_.rng_seed);
            store_.populate(std::move(flags));
            auto failures = env.place(store_.flags());
            if (!failures.empty())
                throw StartError("flag placement failed: " + failures.front());
        } catch (const std::exception& e) {
            phase_ = MatchPhase::Configured;
            store_ = FlagStore{};
            diagnostics_.push_back(e.what());
            env.teardown();
            rebuild_snapshot();
            throw;
        }
        started_at_ = clock_.now_ms();
        MatchStartedEvent ev;
        ev.at = started_at_;
        ev.match_id = cfg_.match_id;
        for (const auto& t : cfg_.teams) ev.teams.push_back(t.id);
        for (const auto& m : cfg_.machines) ev.machines.push_back(m.name);
        ev.round_interval_ms = cfg_.round_interval_ms;
        ev.time_limit_ms = cfg_.time_limit_ms;
        log_.append(ev);
        phase_ = MatchPhase::Running;
        rebuild_snapshot();
    }

    // All (team, machine) pairs of the match in deterministic order.
    std::vector<std::pair<int, std::string>> pairs() const {
        std::vector<std::pair<int, std::string>> out;
        for (const auto& t : cfg_.teams)
            for (const auto& m : cfg_.machines) out.emplace_back(t.id, m.name);
        std::sort(out.begin(), out.end());
        return out;
    }

    // Runs the next round's checks against the backend and applies them.
    // Checks execute outside the engine lock; only the fold-in serializes.
    void run_next_round(CheckBackend& backend) {
        int round;
        {
            std::lock_guard lock(mu_);
            if (phase_ != MatchPhase::Running) return;
            round = current_round_;
        }
        auto results = runner_.run_round(round, pairs(), backend);
        apply_round_results(round, results);
    }

    // Scores one round's results. Stale or post-end deliveries are rejected
    // and kept as diagnostics.
    void apply_round_results(int round, const std::vector<CheckResult>& results) {
        std::lock_guard lock(mu_);
        if (phase_ != MatchPhase::Running) {
            diagnostics_.push_back("round " + std::to_string(round) + " results after match end");
            return;
        }
        if (round != current_round_) {
            diagnostics_.push_back("stale results for round " + std::to_string(round) +
                                   " (current " + std::to_string(current_round_) + ")");
            return;
        }
        const millis now = clock_.now_ms();
        for (const auto& res : results) {
            ScoreEvent ev = score_round(res.team, res.machine, round, res.status, cfg_.scoring, now);
            ledger_.append(ev);
            log_.append(ScoreAppliedEvent{ev});
            auto key = std::make_pair(res.team, res.machine);
            Verdict previous = Verdict::Ok; // healthy until evidence says otherwise
            if (auto it = last_status_.find(key); it != last_status_.end()) previous = it->second;
            if (res.status != previous) {
                StatusChangeEvent sc;
                sc.at = now;
                sc.round = round;
                sc.team = res.team;
                sc.machine = res.machine;
                sc.from = previous;
                sc.to = res.status;
                log_.append(sc);
            }
            last_status_[key] = res.status;
        }
        ++current_round_;
        rebuild_snapshot();
    }

    // Linearizable per token through the engine lock; a root capture that
    // completes the sweep ends the match immediately, not at the round edge.
    SubmissionRecord submit_flag(int team, const std::string& token) {
        std::lock_guard lock(mu_);
        if (!find_team(cfg_, team)) throw std::invalid_argument("unknown team: " + std::to_string(team));
        const millis now = clock_.now_ms();
        SubmissionRecord rec = store_.submit(team, token, now, phase_ == MatchPhase::Running);
        if (accepted(rec.outcome)) {
            ScoreEvent ev = score_flag_capture(team, rec.machine, *rec.flag_kind, cfg_.scoring, now);
            ledger_.append(ev);
            log_.append(ScoreAppliedEvent{ev});
            FlagCaptureEvent cap;
            cap.at = now;
            cap.team = team;
            cap.victim_team = rec.victim_team;
            cap.machine = rec.machine;
            cap.flag_kind = *rec.flag_kind;
            log_.append(cap);
            rebuild_snapshot();
            if (rec.outcome == SubmissionOutcome::AcceptedRoot &&
                store_.all_enemy_root_flags_captured(team))
                end_match_locked(EndReason::RootSweep, now);
        }
        return rec;
    }

    void manual_stop() {
        std::lock_guard lock(mu_);
        if (phase_ != MatchPhase::Running) throw std::logic_error("match not running");
        end_match_locked(EndReason::ManualStop, clock_.now_ms());
    }

    // Ends the match once the clock passes the time limit; returns true when
    // the match is over either way.
    bool enforce_time_limit() {
        std::lock_guard lock(mu_);
        if (phase_ == MatchPhase::Ended) return true;
        if (phase_ != MatchPhase::Running) return false;
        if (clock_.now_ms() - started_at_ >= cfg_.time_limit_ms) {
            end_match_locked(EndReason::TimeLimit, started_at_ + cfg_.time_limit_ms);
            return true;
        }
        return false;
    }

    // Next scheduled tick, or nothing once the match is (or should be) over.
    std::optional<millis> next_round_at() const {
        std::lock_guard lock(mu_);
        if (phase_ != MatchPhase::Running) return std::nullopt;
        millis tick = started_at_ + static_cast<millis>(current_round_) * cfg_.round_interval_ms;
        if (tick - started_at_ >= cfg_.time_limit_ms) return std::nullopt;
        return tick;
    }

    millis ends_at() const {
        std::lock_guard lock(mu_);
        return started_at_ + cfg_.time_limit_ms;
    }
    millis started_at() const {
        std::lock_guard lock(mu_);
        return started_at_;
    }

    MatchPhase phase() const {
        std::lock_guard lock(mu_);
        return phase_;
    }
    int current_round() const {
        std::lock_guard lock(mu_);
        return current_round_;
    }
    std::optional<EndReason> end_reason() const {
        std::lock_guard lock(mu_);
        return end_reason_;
    }

    TeamMachineTotals totals() const {
        std::lock_guard lock(mu_);
        return fold_ledger(ledger_);
    }

    std::shared_ptr<const StatusSnapshot> snapshot() const {
        std::lock_guard lock(snapshot_mu_);
        return snapshot_;
    }

    const FlagStore& flag_store() const { return store_; }

    std::vector<MatchEvent> events() const {
        std::lock_guard lock(mu_);
        return log_.events();
    }
    std::string serialized_log() const {
        std::lock_guard lock(mu_);
        return log_.serialize();
    }
    std::vector<std::string> diagnostics() const {
        std::lock_guard lock(mu_);
        return diagnostics_;
    }

private:
    void end_match_locked(EndReason reason, millis at) {
        phase_ = MatchPhase::Ended;
        end_reason_ = reason;
        ended_at_ = at;
        MatchEndedEvent ev;
        ev.at = at;
        ev.reason = reason;
        ev.rounds_completed = current_round_;
        for (const auto& [key, total] : fold_ledger(ledger_)) ev.totals[key.first][key.second] = total;
        log_.append(ev);
        rebuild_snapshot();
    }

    void rebuild_snapshot() {
        auto snap = std::make_shared<StatusSnapshot>();
        snap->match_id = cfg_.match_id;
        snap->phase = phase_;
        snap->current_round = current_round_;
        snap->end_reason = end_reason_;
        auto totals = fold_ledger(ledger_);
        for (const auto& t : cfg_.teams) {
            TeamStatusEntry team;
            team.team_id = t.id;
            team.name = t.name;
            for (const auto& m : cfg_.machines) {
                MachineStatusEntry entry;
                entry.machine = m.name;
                auto st = last_status_.find({t.id, m.name});
                entry.status = st == last_status_.end() ? Verdict::Ok : st->second;
                auto score = totals.find({t.id, m.name});
                entry.score = score == totals.end() ? 0 : score->second;
                team.total += entry.score;
                team.machines.push_back(std::move(entry));
            }
            snap->teams.push_back(std::move(team));
        }
        std::lock_guard lock(snapshot_mu_);
        snapshot_ = std::move(snap);
    }

    MatchConfig cfg_;
    Clock& clock_;

    mutable std::mutex mu_;
    MatchPhase phase_ = MatchPhase::Configured;
    int current_round_ = 0;
    millis started_at_ = 0;
    millis ended_at_ = 0;
    std::optional<EndReason> end_reason_;
    FlagStore store_;
    ScoreLedger ledger_;
    EventLog log_;
    RoundRunner runner_;
    std::map<std::pair<int, std::string>, Verdict> last_status_;
    std::vector<std::string> diagnostics_;

    mutable std::mutex snapshot_mu_;
    std::shared_ptr<const StatusSnapshot> snapshot_;
};

} // namespace adctf
