#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "config.hpp"
#include "flag.hpp"
#include "manifest.hpp"
#include "runtime.hpp"

namespace adctf {

struct ProvisionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EnvironmentHandle {
    int team = 0;
    std::string machine;
    std::string container_id;
    std::string ip;   // address the checker probes
    int port = 0;     // 0 when the manifest's default service port applies
    std::string root_password;
};

struct Subnet {
    std::uint32_t base = 0;
    int prefix = 24;

    std::uint32_t size() const { return prefix >= 32 ? 1u : (1u << (32 - prefix)); }

    std::string address(std::uint32_t host_index) const {
        std::uint32_t ip = base + host_index;
        std::ostringstream out;
        out << ((ip >> 24) & 0xff) << '.' << ((ip >> 16) & 0xff) << '.' << ((ip >> 8) & 0xff) << '.'
            << (ip & 0xff);
        return out.str();
    }
};

inline Subnet parse_subnet(const std::string& s) {
    unsigned a, b, c, d;
    int prefix;
    char tail;
    if (std::sscanf(s.c_str(), "%u.%u.%u.%u/%d%c", &a, &b, &c, &d, &prefix, &tail) != 5 || a > 255 ||
        b > 255 || c > 255 || d > 255 || prefix < 8 || prefix > 30)
        throw ConfigError("bad subnet: " + s);
    Subnet net;
    net.prefix = prefix;
    net.base = (a << 24) | (b << 16) | (c << 8) | d;
    net.base &= ~(net.size() - 1);
    return net;
}

// Hosts in sorted (team, machine) order starting at .10; the low addresses
// stay reserved for the gateway and the game server. Injective by
// construction and a pure function of the sorted inputs.
constexpr std::uint32_t first_assignable_host = 10;

inline std::map<std::pair<int, std::string>, std::string>
plan_addresses(const MatchConfig& cfg) {
    Subnet net = parse_subnet(cfg.network.subnet);
    const std::uint32_t last_host = net.size() - 2; // broadcast excluded
    std::vector<std::pair<int, std::string>> pairs;
    for (const auto& t : cfg.teams)
        for (const auto& m : cfg.machines) pairs.emplace_back(t.id, m.name);
    std::sort(pairs.begin(), pairs.end());
    if (first_assignable_host + pairs.size() - 1 > last_host)
        throw ProvisionError("subnet capacity exceeded: " + std::to_string(pairs.size()) +
                             " hosts needed, " +
                             std::to_string(last_host - first_assignable_host + 1) +
                             " assignable in " + cfg.network.subnet);
    std::map<std::pair<int, std::string>, std::string> plan;
    std::uint32_t next = first_assignable_host;
    for (const auto& p : pairs) plan[p] = net.address(next++);
    return plan;
}

inline std::string game_server_address(const MatchConfig& cfg) {
    return parse_subnet(cfg.network.subnet).address(2);
}

// Root credentials are per (team, machine) and deterministic in the match
// seed, on a stream separated from flag-token generation.
inline std::map<std::pair<int, std::string>, std::string>
plan_root_passwords(const MatchConfig& cfg) {
    std::mt19937_64 rng(cfg.rng_seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<std::pair<int, std::string>> pairs;
    for (const auto& t : cfg.teams)
        for (const auto& m : cfg.machines) pairs.emplace_back(t.id, m.name);
    std::sort(pairs.begin(), pairs.end());
    std::map<std::pair<int, std::string>, std::string> out;
    for (const auto& p : pairs) out[p] = "pw-" + detail::hex32(rng).substr(0, 16);
    return out;
}

struct ProvisionResult {
    std::string network_id;
    std::vector<EnvironmentHandle> handles;
};

struct TeardownReport {
    std::vector<std::string> removed;
    std::vector<std::pair<std::string, std::string>> failures; // (id, error)
    bool clean() const { return failures.empty(); }
};

// Per-handle failures are collected, never fatal; re-running on an already
// torn down match succeeds.
inline TeardownReport teardown(const ProvisionResult& env, ContainerRuntime& runtime) {
    TeardownReport report;
    for (const auto& h : env.handles) {
        try {
            runtime.stop_container(h.container_id);
            runtime.remove_container(h.container_id);
            report.removed.push_back(h.container_id);
        } catch (const std::exception& e) {
            report.failures.emplace_back(h.container_id, e.what());
        }
    }
    if (!env.network_id.empty()) {
        try {
            runtime.remove_network(env.network_id);
        } catch (const std::exception& e) {
            report.failures.emplace_back(env.network_id, e.what());
        }
    }
    return report;
}

// Both teams run the same image per machine, so the catalog is consulted once
// per machine name; a missing image is reported by machine.
inline ProvisionResult provision(const MatchConfig& cfg, const ManifestCatalog& catalog,
                                 ContainerRuntime& runtime) {
    if (!runtime.ping()) throw ProvisionError("container runtime unreachable");
    auto plan = plan_addresses(cfg);
    auto passwords = plan_root_passwords(cfg);

    ProvisionResult result;
    result.network_id = runtime.create_network("adctf-" + cfg.match_id, cfg.network.subnet);
    try {
        std::vector<std::pair<int, std::string>> pairs;
        for (const auto& t : cfg.teams)
            for (const auto& m : cfg.machines) pairs.emplace_back(t.id, m.name);
        std::sort(pairs.begin(), pairs.end());
        for (const auto& [team, machine] : pairs) {
            ContainerSpec spec;
            spec.name = cfg.match_id + "-t" + std::to_string(team) + "-" + machine;
            auto manifest = catalog.find(machine);
            spec.image = manifest != catalog.end() ? manifest->second.image : "";
            spec.team = team;
            spec.machine = machine;
            spec.ip = plan.at({team, machine});
            spec.network = result.network_id;
            std::string id;
            try {
                id = runtime.create_container(spec);
                runtime.start_container(id);
            } catch (const std::exception& e) {
                throw ProvisionError("machine " + machine + " (team " + std::to_string(team) +
                                     "): " + e.what());
            }
            EnvironmentHandle handle;
            handle.team = team;
            handle.machine = machine;
            handle.container_id = id;
            handle.ip = runtime.checker_host(id);
            handle.port = runtime.checker_port(id);
            handle.root_password = passwords.at({team, machine});
            result.handles.push_back(std::move(handle));
        }
    } catch (...) {
        teardown(result, runtime);
        throw;
    }
    return result;
}

struct PlacementEntry {
    int team = 0;
    std::string machine;
    std::string path;
    bool ok = false;
    std::string error;
};

struct PlacementReport {
    std::vector<PlacementEntry> entries;
    bool all_ok() const {
        for (const auto& e : entries)
            if (!e.ok) return false;
        return !entries.empty();
    }
    std::string first_failure() const {
        for (const auto& e : entries)
            if (!e.ok)
                return "team " + std::to_string(e.team) + " machine " + e.machine + " " + e.path +
                       ": " + e.error;
        return "";
    }
};

// Token written verbatim plus one terminating newline; mode 600, root flag
// owned by root and user flag by the service user. Each write is read back so
// a silently corrupt placement cannot start a match.
inline PlacementReport place_flags(const std::vector<Flag>& flags,
                                   const std::vector<EnvironmentHandle>& handles,
                                   const ManifestCatalog& catalog, ContainerRuntime& runtime) {
    std::map<std::pair<int, std::string>, const EnvironmentHandle*> by_pair;
    for (const auto& h : handles) by_pair[{h.team, h.machine}] = &h;

    PlacementReport report;
    for (const auto& flag : flags) {
        PlacementEntry entry;
        entry.team = flag.owner_team;
        entry.machine = flag.machine;
        entry.path = flag.path;
        auto it = by_pair.find({flag.owner_team, flag.machine});
        if (it == by_pair.end()) {
            entry.error = "no environment handle";
            report.entries.push_back(std::move(entry));
            continue;
        }
        std::string owner = "root";
        if (flag.kind == FlagKind::User) {
            auto m = catalog.find(flag.machine);
            owner = m != catalog.end() ? m->second.service_user : "ctf";
        }
        try {
            runtime.write_file(it->second->container_id, flag.path, flag.token + "\n", 0600, owner);
            std::string back = runtime.read_file(it->second->container_id, flag.path);
            if (back != flag.token + "\n")
                entry.error = "read-back mismatch";
            else
                entry.ok = true;
        } catch (const std::exception& e) {
            entry.error = e.what();
        }
        report.entries.push_back(std::move(entry));
    }
    return report;
}

} // namespace adctf
