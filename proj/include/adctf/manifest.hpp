#pragma once

#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "checker.hpp"
#include "config.hpp"

namespace adctf {

// Per-machine challenge description; a directory of these is the catalog.
struct ScenarioManifest {
    std::string machine;
    int difficulty = 1;
    std::string image;
    std::vector<int> service_ports;
    std::string service_user = "ctf";
    std::vector<std::string> techniques;
    std::string checker_command;
    millis checker_timeout_ms = default_check_timeout_ms;
    std::map<std::string, std::string> checker_env;
    std::string challenge_specific_instructions;
};

inline ScenarioManifest manifest_from_json(const nlohmann::json& j) {
    ScenarioManifest m;
    try {
        m.machine = j.at("machine").get<std::string>();
        m.difficulty = j.at("difficulty").get<int>();
        m.image = j.value("image", "");
        if (j.contains("service_ports"))
            m.service_ports = j.at("service_ports").get<std::vector<int>>();
        m.service_user = j.value("service_user", m.service_user);
        if (j.contains("techniques")) m.techniques = j.at("techniques").get<std::vector<std::string>>();
        if (j.contains("checker")) {
            const auto& c = j.at("checker");
            m.checker_command = c.value("command", "");
            m.checker_timeout_ms = static_cast<millis>(c.value("timeout_s", 10.0) * 1000.0);
            if (c.contains("env"))
                m.checker_env = c.at("env").get<std::map<std::string, std::string>>();
        }
        m.challenge_specific_instructions = j.value("challenge_specific_instructions", "");
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad scenario manifest: ") + e.what());
    }
    if (m.difficulty < 1 || m.difficulty > 5)
        throw ConfigError("manifest " + m.machine + ": difficulty must be within 1..5");
    return m;
}

inline ScenarioManifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario manifest: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("cannot parse " + path + ": " + e.what());
    }
    return manifest_from_json(j);
}

using ManifestCatalog = std::map<std::string, ScenarioManifest>; // keyed by machine name

// Loads manifests referenced by the config and back-fills machine metadata
// (service user, checker) that the match config left to the manifest.
inline ManifestCatalog load_catalog(MatchConfig& cfg, const std::string& base_dir = "") {
    ManifestCatalog catalog;
    for (auto& machine : cfg.machines) {
        if (machine.manifest.empty()) continue;
        std::string path = machine.manifest;
        if (!base_dir.empty() && path.front() != '/') path = base_dir + "/" + path;
        ScenarioManifest m = load_manifest(path);
        if (m.machine != machine.name)
            throw ConfigError("manifest machine '" + m.machine + "' does not match config machine '" +
                              machine.name + "'");
        machine.service_user = m.service_user;
        if (machine.checker.empty()) machine.checker = m.checker_command;
        catalog[machine.name] = std::move(m);
    }
    return catalog;
}

} // namespace adctf
