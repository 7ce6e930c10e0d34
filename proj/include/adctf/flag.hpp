#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "config.hpp"
#include "scoring.hpp"
#include "time.hpp"

namespace adctf {

struct Capture {
    int team = 0;
    millis at = 0;
};

struct Flag {
    int owner_team = 0;
    std::string machine;
    FlagKind kind = FlagKind::User;
    std::string token; // FLAG{32 lowercase hex}
    std::string path;  // /home/<user>/user.txt or /root/root.txt
    std::optional<Capture> captured_by;
};

enum class SubmissionOutcome {
    AcceptedUser,
    AcceptedRoot,
    RejectedSelf,
    RejectedDuplicate,
    RejectedUnknown,
    RejectedMatchEnded, // late submissions are recorded for audit, never scored
};

inline const char* to_string(SubmissionOutcome o) {
    switch (o) {
    case SubmissionOutcome::AcceptedUser: return "ACCEPTED_USER";
    case SubmissionOutcome::AcceptedRoot: return "ACCEPTED_ROOT";
    case SubmissionOutcome::RejectedSelf: return "REJECTED_SELF";
    case SubmissionOutcome::RejectedDuplicate: return "REJECTED_DUPLICATE";
    case SubmissionOutcome::RejectedUnknown: return "REJECTED_UNKNOWN";
    case SubmissionOutcome::RejectedMatchEnded: return "REJECTED_MATCH_ENDED";
    }
    return "REJECTED_UNKNOWN";
}

inline bool accepted(SubmissionOutcome o) {
    return o == SubmissionOutcome::AcceptedUser || o == SubmissionOutcome::AcceptedRoot;
}

struct SubmissionRecord {
    int team = 0;
    std::string token;
    millis at = 0;
    SubmissionOutcome outcome = SubmissionOutcome::RejectedUnknown;
    // set only on acceptance
    std::optional<FlagKind> flag_kind;
    std::string machine;
    int victim_team = 0;
};

inline std::string user_flag_path(const std::string& service_user) {
    return "/home/" + service_user + "/user.txt";
}

constexpr const char* root_flag_path = "/root/root.txt";

namespace detail {

inline std::string hex32(std::mt19937_64& rng) {
    static const char* digits = "0123456789abcdef";
    std::string s;
    s.reserve(32);
    for (int i = 0; i < 4; ++i) {
        std::uint64_t word = rng();
        for (int nib = 0; nib < 8; ++nib) {
            s.push_back(digits[word & 0xf]);
            word >>= 4;
        }
    }
    return s;
}

} // namespace detail

// Deterministic in (config, seed): one USER and one ROOT flag per (team, machine),
// drawn in sorted order from a single seeded generator. Tokens are unique by
// construction (regenerated on the astronomically unlikely collision).
inline std::vector<Flag> generate_flags(const MatchConfig& cfg, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<int> team_ids;
    for (const auto& t : cfg.teams) team_ids.push_back(t.id);
    std::sort(team_ids.begin(), team_ids.end());
    std::vector<const MachineSpec*> machines;
    for (const auto& m : cfg.machines) machines.push_back(&m);
    std::sort(machines.begin(), machines.end(),
              [](const MachineSpec* a, const MachineSpec* b) { return a->name < b->name; });

    std::set<std::string> seen;
    std::vector<Flag> flags;
    for (int team : team_ids) {
        for (const MachineSpec* m : machines) {
            for (FlagKind kind : {FlagKind::User, FlagKind::Root}) {
                std::string token;
                do {
                    token = "FLAG{" + detail::hex32(rng) + "}";
                } while (!seen.insert(token).second);
                Flag f;
                f.owner_team = team;
                f.machine = m->name;
                f.kind = kind;
                f.token = std::move(token);
                f.path = kind == FlagKind::User ? user_flag_path(m->service_user) : root_flag_path;
                flags.push_back(std::move(f));
            }
        }
    }
    return flags;
}

// Holds every flag of the match and the append-only submission history.
// submit() is linearizable per token: acceptance runs under one lock, so a
// flag can be captured exactly once regardless of interleaving.
class FlagStore {
public:
    FlagStore() : mu_(std::make_unique<std::mutex>()) {}
    FlagStore(FlagStore&&) = default;
    FlagStore& operator=(FlagStore&&) = default;

    void populate(std::vector<Flag> flags) {
        std::lock_guard lock(*mu_);
        if (!flags_.empty()) throw std::logic_error("flags already generated");
        for (auto& f : flags) {
            auto token = f.token;
            if (!flags_.emplace(std::move(token), std::move(f)).second)
                throw std::logic_error("duplicate flag token");
        }
    }

    // Matching is exact after trimming surrounding whitespace; tokens are
    // lowercase hex by construction so no case folding happens.
    SubmissionRecord submit(int team, const std::string& raw_token, millis now,
                            bool match_running) {
        std::lock_guard lock(*mu_);
        SubmissionRecord rec;
        rec.team = team;
        rec.token = trim(raw_token);
        rec.at = now;
        if (!match_running) {
            rec.outcome = SubmissionOutcome::RejectedMatchEnded;
        } else if (auto it = flags_.find(rec.token); it == flags_.end()) {
            rec.outcome = SubmissionOutcome::RejectedUnknown;
        } else if (it->second.owner_team == team) {
            rec.outcome = SubmissionOutcome::RejectedSelf;
        } else if (it->second.captured_by) {
            rec.outcome = SubmissionOutcome::RejectedDuplicate;
        } else {
            Flag& f = it->second;
            f.captured_by = Capture{team, now};
            rec.outcome = f.kind == FlagKind::User ? SubmissionOutcome::AcceptedUser
                                                   : SubmissionOutcome::AcceptedRoot;
            rec.flag_kind = f.kind;
            rec.machine = f.machine;
            rec.victim_team = f.owner_team;
        }
        submissions_.push_back(rec);
        return rec;
    }

    // True iff every ROOT flag owned by an opposing team is captured by `team`.
    bool all_enemy_root_flags_captured(int team) const {
        std::lock_guard lock(*mu_);
        bool any = false;
        for (const auto& [token, f] : flags_) {
            if (f.kind != FlagKind::Root || f.owner_team == team) continue;
            any = true;
            if (!f.captured_by || f.captured_by->team != team) return false;
        }
        return any;
    }

    std::vector<Flag> flags() const {
        std::lock_guard lock(*mu_);
        std::vector<Flag> out;
        out.reserve(flags_.size());
        for (const auto& [token, f] : flags_) out.push_back(f);
        return out;
    }

    std::vector<SubmissionRecord> submissions() const {
        std::lock_guard lock(*mu_);
        return submissions_;
    }

    std::size_t size() const {
        std::lock_guard lock(*mu_);
        return flags_.size();
    }

private:
    static std::string trim(const std::string& s) {
        auto b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) return "";
        auto e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    }

    std::unique_ptr<std::mutex> mu_;
    std::map<std::string, Flag> flags_;
    std::vector<SubmissionRecord> submissions_;
};

} // namespace adctf
