#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <unistd.h>

#include "status.hpp"
#include "subprocess.hpp"
#include "time.hpp"

namespace adctf {

constexpr millis default_check_timeout_ms = 10 * second_ms;
constexpr std::size_t check_detail_limit = 4096;

// External checker program for one service. The default argument template is
// the wire protocol; custom templates must still route host and team through.
struct CheckerSpec {
    std::string machine;
    std::string command;
    std::vector<std::string> args_template = {"--host",    "{host}",    "--team",  "{team}",
                                              "--machine", "{machine}", "--round", "{round}"};
    millis timeout_ms = default_check_timeout_ms;
    std::map<std::string, std::string> env;
};

inline void validate(const CheckerSpec& spec) {
    if (spec.command.empty()) throw std::invalid_argument("checker command must not be empty");
    if (spec.timeout_ms <= 0) throw std::invalid_argument("checker timeout must be positive");
    auto mentions = [&spec](const std::string& ph) {
        for (const auto& a : spec.args_template)
            if (a.find(ph) != std::string::npos) return true;
        return false;
    };
    if (!mentions("{host}") || !mentions("{team}"))
        throw std::invalid_argument("checker argument template must reference {host} and {team}");
}

struct CheckTarget {
    int team = 0;
    std::string machine;
    std::string host;
    std::map<std::string, std::string> env; // per-target context, e.g. expected flag tokens
};

struct CheckResult {
    int team = 0;
    std::string machine;
    int round = 0;
    Verdict status = Verdict::Error;
    millis latency_ms = 0;
    std::string detail; // checker output, truncated
};

namespace detail {

inline std::string substitute_arg(const std::string& tpl, const CheckTarget& target, int round) {
    std::string out = tpl;
    auto replace_all = [&out](const std::string& from, const std::string& to) {
        for (std::size_t pos = 0; (pos = out.find(from, pos)) != std::string::npos; pos += to.size())
            out.replace(pos, from.size(), to);
    };
    replace_all("{host}", target.host);
    replace_all("{team}", std::to_string(target.team));
    replace_all("{machine}", target.machine);
    replace_all("{round}", std::to_string(round));
    return out;
}

// Last line of stdout, parsed as a decimal wire code; anything else is a
// checker fault.
inline std::optional<int> parse_status_line(const std::string& out) {
    std::size_t end = out.find_last_not_of(" \t\r\n");
    if (end == std::string::npos) return std::nullopt;
    std::size_t begin = out.find_last_of('\n', end);
    begin = begin == std::string::npos ? 0 : begin + 1;
    std::string line = out.substr(begin, end - begin + 1);
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty() || line.size() > 9) return std::nullopt;
    for (char c : line)
        if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
    return std::stoi(line);
}

inline std::string truncated(std::string s) {
    if (s.size() > check_detail_limit) s.resize(check_detail_limit);
    return s;
}

} // namespace detail

// Spawns the checker process and maps its report onto a verdict:
// missing executable or malformed output -> ERROR, timeout -> DOWN
// (an unreachable service and a hung check are indistinguishable here).
inline CheckResult run_check(const CheckerSpec& spec, const CheckTarget& target, int round) {
    CheckResult res;
    res.team = target.team;
    res.machine = target.machine;
    res.round = round;

    if (access(spec.command.c_str(), X_OK) != 0) {
        res.status = Verdict::Error;
        res.detail = "checker not executable: " + spec.command;
        return res;
    }

    std::vector<std::string> argv{spec.command};
    for (const auto& a : spec.args_template) argv.push_back(detail::substitute_arg(a, target, round));
    std::map<std::string, std::string> env = spec.env;
    for (const auto& [k, v] : target.env) env[k] = v;

    ProcessResult proc = run_process(argv, env, spec.timeout_ms);
    res.latency_ms = proc.elapsed_ms;
    res.detail = detail::truncated(proc.out + (proc.err.empty() ? "" : "\n" + proc.err));

    if (proc.timed_out) {
        res.status = Verdict::Down;
        return res;
    }
    if (proc.spawn_failed || proc.signalled || proc.exit_code != 0) {
        res.status = Verdict::Error;
        return res;
    }
    auto code = detail::parse_status_line(proc.out);
    auto verdict = code ? verdict_from_wire(*code) : std::nullopt;
    res.status = verdict.value_or(Verdict::Error);
    return res;
}

// Source of verdicts for one round. Implementations: process checkers for live
// matches, a scripted table for simulation.
class CheckBackend {
public:
    virtual ~CheckBackend() = default;
    virtual CheckResult check(int team, const std::string& machine, int round) = 0;
};

// Mutable verdict table driven by blue-bot actions; healthy by default.
class ScriptedCheckBackend final : public CheckBackend {
public:
    void set_status(int team, const std::string& machine, Verdict v) {
        std::lock_guard lock(mu_);
        table_[{team, machine}] = v;
    }

    CheckResult check(int team, const std::string& machine, int round) override {
        std::lock_guard lock(mu_);
        CheckResult res;
        res.team = team;
        res.machine = machine;
        res.round = round;
        auto it = table_.find({team, machine});
        res.status = it == table_.end() ? Verdict::Ok : it->second;
        return res;
    }

private:
    std::mutex mu_;
    std::map<std::pair<int, std::string>, Verdict> table_;
};

class ProcessCheckBackend final : public CheckBackend {
public:
    void add(CheckerSpec spec, CheckTarget target) {
        validate(spec);
        auto key = std::make_pair(target.team, target.machine);
        specs_[key] = std::move(spec);
        targets_[key] = std::move(target);
    }

    CheckResult check(int team, const std::string& machine, int round) override {
        auto key = std::make_pair(team, machine);
        auto spec = specs_.find(key);
        auto target = targets_.find(key);
        if (spec == specs_.end() || target == targets_.end()) {
            CheckResult res;
            res.team = team;
            res.machine = machine;
            res.round = round;
            res.status = Verdict::Error;
            res.detail = "no checker registered for pair";
            return res;
        }
        return run_check(spec->second, target->second, round);
    }

private:
    std::map<std::pair<int, std::string>, CheckerSpec> specs_;
    std::map<std::pair<int, std::string>, CheckTarget> targets_;
};

// Runs every (team, machine) check of one round. Checks launch concurrently on
// a bounded pool; the round closes when all complete or time out. Results come
// back in (team, machine) order no matter which checker finished first, and a
// round can only run once.
class RoundRunner {
public:
    explicit RoundRunner(std::size_t max_workers = 8)
        : max_workers_(std::max<std::size_t>(1, max_workers)) {}

    std::vector<CheckResult> run_round(int round,
                                       const std::vector<std::pair<int, std::string>>& pairs,
                                       CheckBackend& backend) {
        {
            std::lock_guard lock(mu_);
            if (!executed_.insert(round).second)
                throw std::logic_error("round already executed: " + std::to_string(round));
        }
        std::vector<CheckResult> results(pairs.size());
        std::size_t workers = std::min(max_workers_, std::max<std::size_t>(1, pairs.size()));
        std::vector<std::thread> pool;
        std::mutex next_mu;
        std::size_t next = 0;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&]() {
                for (;;) {
                    std::size_t i;
                    {
                        std::lock_guard lock(next_mu);
                        if (next >= pairs.size()) return;
                        i = next++;
                    }
                    results[i] = backend.check(pairs[i].first, pairs[i].second, round);
                }
            });
        }
        for (auto& t : pool) t.join();
        std::sort(results.begin(), results.end(), [](const CheckResult& a, const CheckResult& b) {
            return std::tie(a.team, a.machine) < std::tie(b.team, b.machine);
        });
        return results;
    }

private:
    std::size_t max_workers_;
    std::mutex mu_;
    std::set<int> executed_;
};

// Round k fires at k * interval for every k with k * interval strictly below
// the effective horizon (time limit or earlier stop). Round 0 fires at match
// start, so a 20-minute match at 60 s yields rounds 0..19.
inline std::vector<millis> round_tick_offsets(millis interval_ms, millis limit_ms,
                                              std::optional<millis> stop_after_ms = std::nullopt) {
    if (interval_ms <= 0) throw std::invalid_argument("round interval must be positive");
    millis horizon = limit_ms;
    if (stop_after_ms) horizon = std::min(horizon, *stop_after_ms);
    std::vector<millis> ticks;
    for (millis t = 0; t < horizon; t += interval_ms) ticks.push_back(t);
    return ticks;
}

inline int completed_rounds(millis elapsed_ms, millis interval_ms) {
    if (elapsed_ms < 0) return 0;
    return static_cast<int>(elapsed_ms / interval_ms) + 1;
}

} // namespace adctf
