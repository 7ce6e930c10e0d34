#pragma once

#include <map>
#include <string>
#include <vector>

#include "engine.hpp"
#include "manifest.hpp"
#include "provision.hpp"
#include "runtime.hpp"

namespace adctf {

// Container-backed match environment: provisions per-(team, machine)
// containers, places flags inside them, and wires process checkers against
// the live endpoints. The runtime flavor (docker, local processes, in-memory)
// is the caller's choice.
class ContainerEnvironment final : public MatchEnvironment {
public:
    ContainerEnvironment(const MatchConfig& cfg, ManifestCatalog catalog, ContainerRuntime& runtime)
        : cfg_(cfg), catalog_(std::move(catalog)), runtime_(runtime) {}

    void provision() override { result_ = adctf::provision(cfg_, catalog_, runtime_); }

    std::vector<std::string> place(const std::vector<Flag>& flags) override {
        PlacementReport report = place_flags(flags, result_.handles, catalog_, runtime_);
        std::vector<std::string> failures;
        for (const auto& e : report.entries)
            if (!e.ok)
                failures.push_back("team " + std::to_string(e.team) + " machine " + e.machine +
                                   " " + e.path + ": " + e.error);
        if (failures.empty()) wire_checkers(flags);
        return failures;
    }

    CheckBackend& backend() override { return backend_; }

    void teardown() override {
        last_teardown_ = adctf::teardown(result_, runtime_);
        result_ = ProvisionResult{};
    }

    const TeardownReport& last_teardown() const { return last_teardown_; }
    const std::vector<EnvironmentHandle>& handles() const { return result_.handles; }
    const std::string& network_id() const { return result_.network_id; }
    const ManifestCatalog& catalog() const { return catalog_; }

private:
    // The checker learns the endpoint plus where the flags must live and what
    // they must contain, so it can verify integrity through its own channel.
    void wire_checkers(const std::vector<Flag>& flags) {
        std::map<std::pair<int, std::string>, std::map<std::string, std::string>> flag_env;
        for (const auto& f : flags) {
            auto& env = flag_env[{f.owner_team, f.machine}];
            if (f.kind == FlagKind::User) {
                env["ADCTF_USER_FLAG_PATH"] = f.path;
                env["ADCTF_USER_FLAG_TOKEN"] = f.token;
            } else {
                env["ADCTF_ROOT_FLAG_PATH"] = f.path;
                env["ADCTF_ROOT_FLAG_TOKEN"] = f.token;
            }
        }
        for (const auto& h : result_.handles) {
            const MachineSpec* machine = find_machine(cfg_, h.machine);
            CheckerSpec spec;
            spec.machine = h.machine;
            spec.command = machine ? machine->checker : "";
            auto m = catalog_.find(h.machine);
            if (m != catalog_.end()) {
                spec.timeout_ms = m->second.checker_timeout_ms;
                spec.env = m->second.checker_env;
            }
            CheckTarget target;
            target.team = h.team;
            target.machine = h.machine;
            target.host = h.ip;
            target.env = runtime_.checker_env(h.container_id);
            int port = h.port;
            if (port == 0 && m != catalog_.end() && !m->second.service_ports.empty())
                port = m->second.service_ports.front();
            target.env["ADCTF_SERVICE_PORT"] = std::to_string(port);
            auto fe = flag_env.find({h.team, h.machine});
            if (fe != flag_env.end())
                for (const auto& [k, v] : fe->second) target.env[k] = v;
            backend_.add(std::move(spec), std::move(target));
        }
    }

    const MatchConfig& cfg_;
    ManifestCatalog catalog_;
    ContainerRuntime& runtime_;
    ProvisionResult result_;
    TeardownReport last_teardown_;
    ProcessCheckBackend backend_;
};

} // namespace adctf
