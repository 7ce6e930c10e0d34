// adctf: attack/defense match orchestrator CLI.
//
//   simulate     play a scripted match under a virtual clock, write the event log
//   timeline     render an event log as an SVG timeline
//   wtl          per-machine win/tie/loss table from event logs
//   scores       per-machine score distribution from event logs
//   agents-yaml  emit a team's agents.yml from the deterministic plan
//   serve        run a live match: provision, check rounds, HTTP API

#include <atomic>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include <adctf/agents_config.hpp>
#include <adctf/engine.hpp>
#include <adctf/environment.hpp>
#include <adctf/manifest.hpp>
#include <adctf/report.hpp>
#include <adctf/runtime_docker.hpp>
#include <adctf/runtime_local.hpp>
#include <adctf/server.hpp>
#include <adctf/sim.hpp>
#include <adctf/svg.hpp>
#include <adctf/timeline.hpp>

namespace {

std::atomic<bool> g_stop_requested{false};

void on_signal(int) { g_stop_requested = true; }

std::vector<adctf::MatchSummary> load_summaries(const std::vector<std::string>& paths) {
    std::vector<adctf::MatchSummary> out;
    for (const auto& path : paths) {
        auto summary = adctf::summarize_match(adctf::load_event_log(path));
        if (summary.match_id.empty()) summary.match_id = path;
        out.push_back(std::move(summary));
    }
    return out;
}

int run_simulate(const std::string& config_path, const std::string& scripts_path,
                 std::optional<std::uint64_t> seed, double time_scale, std::string out_path) {
    adctf::MatchConfig cfg = adctf::load_match_config(config_path);
    if (seed) cfg.rng_seed = *seed;
    std::vector<adctf::BotScript> scripts;
    if (!scripts_path.empty()) scripts = adctf::load_scripts(scripts_path);
    if (out_path.empty()) out_path = cfg.match_id + ".events.jsonl";
    auto result = adctf::run_simulated_match(cfg, scripts, time_scale, out_path);
    std::cout << "match " << cfg.match_id << " ended: "
              << (result.end_reason ? adctf::to_string(*result.end_reason) : "?") << " after "
              << result.rounds_completed << " rounds\n";
    for (const auto& team : cfg.teams)
        std::cout << "  team " << team.id << " (" << team.name
                  << "): " << adctf::total_for_team(result.totals, team.id) << " points\n";
    std::cout << "event log: " << out_path << "\n";
    return 0;
}

int run_serve(const std::string& config_path, const std::string& listen, int port,
              const std::string& admin_token, const std::string& runtime_kind,
              const std::string& docker_socket,
              const std::vector<std::string>& image_bins, const std::string& out_dir,
              bool centralized) {
    adctf::MatchConfig cfg = adctf::load_match_config(config_path);
    std::string base_dir = std::filesystem::path(config_path).parent_path().string();
    adctf::ManifestCatalog catalog = adctf::load_catalog(cfg, base_dir);

    std::map<std::string, std::string> binaries;
    for (const auto& spec : image_bins) {
        auto eq = spec.find('=');
        if (eq == std::string::npos) {
            std::cerr << "--image-bin wants IMAGE=PATH, got: " << spec << "\n";
            return 2;
        }
        binaries[spec.substr(0, eq)] = spec.substr(eq + 1);
    }

    std::unique_ptr<adctf::ContainerRuntime> runtime;
    if (runtime_kind == "docker")
        runtime = std::make_unique<adctf::DockerRuntime>(docker_socket);
    else if (runtime_kind == "local")
        runtime = std::make_unique<adctf::LocalProcessRuntime>(binaries);
    else if (runtime_kind == "memory")
        runtime = std::make_unique<adctf::InMemoryRuntime>();
    else {
        std::cerr << "unknown runtime: " << runtime_kind << "\n";
        return 2;
    }

    std::filesystem::create_directories(out_dir);
    adctf::SystemClock clock;
    adctf::Engine engine(cfg, clock);
    engine.open_log_sink(out_dir + "/" + cfg.match_id + ".events.jsonl");
    adctf::ContainerEnvironment env(cfg, catalog, *runtime);

    try {
        engine.start(env);
    } catch (const std::exception& e) {
        std::cerr << "match start failed: " << e.what() << "\n";
        for (const auto& d : engine.diagnostics()) std::cerr << "  " << d << "\n";
        return 1;
    }

    adctf::ApiServer server(engine, admin_token);
    if (!server.start(listen, port)) {
        std::cerr << "cannot bind " << listen << ":" << port << "\n";
        env.teardown();
        return 1;
    }
    std::cout << "api listening on " << listen << ":" << server.port() << "\n";

    // agents.yml per team (and per machine unless centralized); when bound to
    // a wildcard, the briefings carry the match subnet's server address
    const std::string server_ip =
        listen == "0.0.0.0" ? adctf::game_server_address(cfg) : listen;
    const auto scope = centralized ? adctf::AgentScope::Centralized : adctf::AgentScope::PerMachine;
    for (const auto& team : cfg.teams) {
        std::vector<std::string> machines;
        if (centralized)
            machines.push_back("all");
        else
            for (const auto& m : cfg.machines) machines.push_back(m.name);
        for (const auto& machine : machines) {
            auto ctx = adctf::make_agents_context(cfg, env.handles(), catalog, team.id, machine,
                                                  scope, server_ip, std::to_string(server.port()));
            std::string name = out_dir + "/agents-team" + std::to_string(team.id) +
                               (centralized ? "" : "-" + machine) + ".yml";
            std::ofstream out(name);
            out << adctf::generate_agents_yaml(ctx);
            std::cout << "wrote " << name << "\n";
        }
    }

    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);

    while (engine.phase() == adctf::MatchPhase::Running) {
        if (g_stop_requested.exchange(false)) {
            engine.manual_stop();
            break;
        }
        if (engine.enforce_time_limit()) break;
        auto tick = engine.next_round_at();
        if (tick && clock.now_ms() >= *tick) {
            engine.run_next_round(env.backend());
            continue;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
    engine.enforce_time_limit();

    auto reason = engine.end_reason();
    std::cout << "match ended: " << (reason ? adctf::to_string(*reason) : "?") << "\n";
    auto totals = engine.totals();
    for (const auto& team : cfg.teams)
        std::cout << "  team " << team.id << " (" << team.name
                  << "): " << adctf::total_for_team(totals, team.id) << " points\n";

    server.stop();
    env.teardown();
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"attack/defense CTF match orchestrator"};
    app.require_subcommand(1);

    // simulate
    std::string sim_config, sim_scripts, sim_out;
    std::optional<std::uint64_t> sim_seed;
    double time_scale = 1e9;
    auto* simulate = app.add_subcommand("simulate", "play a scripted match under a virtual clock");
    simulate->add_option("--config", sim_config, "match config JSON")->required();
    simulate->add_option("--scripts", sim_scripts, "bot scripts JSON");
    simulate->add_option("--seed", sim_seed, "override the config rng seed");
    simulate->add_option("--time-scale", time_scale, "wall-clock acceleration factor (>= 1)");
    simulate->add_option("-o,--out", sim_out, "event log path (default <match_id>.events.jsonl)");

    // timeline
    std::string tl_log, tl_out;
    auto* timeline = app.add_subcommand("timeline", "render an event log as SVG");
    timeline->add_option("events", tl_log, "events.jsonl path")->required();
    timeline->add_option("-o,--out", tl_out, "output SVG path")->required();

    // wtl
    std::vector<std::string> wtl_logs;
    bool wtl_json = false;
    auto* wtl = app.add_subcommand("wtl", "win/tie/loss table from event logs");
    wtl->add_option("events", wtl_logs, "events.jsonl paths")->required();
    wtl->add_flag("--json", wtl_json, "machine-readable output");

    // scores
    std::vector<std::string> score_logs;
    bool scores_json = false;
    auto* scores = app.add_subcommand("scores", "score distribution from event logs");
    scores->add_option("events", score_logs, "events.jsonl paths")->required();
    scores->add_flag("--json", scores_json, "machine-readable output");

    // agents-yaml
    std::string ay_config, ay_machine, ay_server_ip = "192.168.3.2", ay_server_port = "8000", ay_out;
    int ay_team = 0;
    bool ay_centralized = false;
    auto* agents = app.add_subcommand("agents-yaml", "emit a team's agents.yml");
    agents->add_option("--config", ay_config, "match config JSON")->required();
    agents->add_option("--team", ay_team, "team id")->required();
    agents->add_option("--machine", ay_machine, "machine name (per-machine scope)");
    agents->add_flag("--centralized", ay_centralized, "one agent pair managing all machines");
    agents->add_option("--server-ip", ay_server_ip, "game server address for the prompts");
    agents->add_option("--server-port", ay_server_port, "game server port for the prompts");
    agents->add_option("-o,--out", ay_out, "output path (default stdout)");

    // serve
    std::string sv_config, sv_listen = "0.0.0.0", sv_token = "change-me",
                sv_runtime = "docker", sv_socket = "/var/run/docker.sock", sv_out_dir = "match-out";
    std::vector<std::string> sv_image_bins;
    int sv_port = 8000;
    bool sv_centralized = false;
    auto* serve = app.add_subcommand("serve", "run a live match with real checkers");
    serve->add_option("--config", sv_config, "match config JSON")->required();
    serve->add_option("--listen", sv_listen, "bind address");
    serve->add_option("--port", sv_port, "bind port");
    serve->add_option("--admin-token", sv_token, "bearer token required by /api/stop");
    serve->add_option("--runtime", sv_runtime, "docker | local | memory");
    serve->add_option("--docker-socket", sv_socket, "docker engine socket path");
    serve->add_option("--image-bin", sv_image_bins,
                      "IMAGE=PATH service binary for the local runtime (repeatable)");
    serve->add_option("--out-dir", sv_out_dir, "directory for event log and agents.yml files");
    serve->add_flag("--centralized", sv_centralized, "centralized agent scope");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed())
            return run_simulate(sim_config, sim_scripts, sim_seed, time_scale, sim_out);

        if (timeline->parsed()) {
            auto view = adctf::build_timeline(adctf::load_event_log(tl_log));
            std::ofstream out(tl_out);
            if (!out) throw std::runtime_error("cannot write " + tl_out);
            out << adctf::render_timeline_svg(view);
            std::cout << "wrote " << tl_out << "\n";
            return 0;
        }

        if (wtl->parsed()) {
            auto report = adctf::report_wtl(load_summaries(wtl_logs));
            std::cout << (wtl_json ? adctf::wtl_to_json(report).dump(2) + "\n"
                                   : adctf::wtl_to_text(report));
            return 0;
        }

        if (scores->parsed()) {
            auto dist = adctf::report_score_distribution(load_summaries(score_logs));
            std::cout << (scores_json ? adctf::scores_to_json(dist).dump(2) + "\n"
                                      : adctf::scores_to_text(dist));
            return 0;
        }

        if (agents->parsed()) {
            adctf::MatchConfig cfg = adctf::load_match_config(ay_config);
            std::string base_dir = std::filesystem::path(ay_config).parent_path().string();
            adctf::ManifestCatalog catalog = adctf::load_catalog(cfg, base_dir);
            if (!ay_centralized && ay_machine.empty())
                throw std::runtime_error("agents-yaml wants --machine or --centralized");
            // Plan-derived handles: same addresses and passwords provisioning would use.
            auto plan = adctf::plan_addresses(cfg);
            auto passwords = adctf::plan_root_passwords(cfg);
            std::vector<adctf::EnvironmentHandle> handles;
            for (const auto& [key, ip] : plan) {
                adctf::EnvironmentHandle h;
                h.team = key.first;
                h.machine = key.second;
                h.ip = ip;
                h.root_password = passwords.at(key);
                handles.push_back(std::move(h));
            }
            auto scope = ay_centralized ? adctf::AgentScope::Centralized : adctf::AgentScope::PerMachine;
            auto ctx = adctf::make_agents_context(cfg, handles, catalog, ay_team,
                                                  ay_centralized ? "all" : ay_machine, scope,
                                                  ay_server_ip, ay_server_port);
            std::string yaml = adctf::generate_agents_yaml(ctx);
            if (ay_out.empty()) {
                std::cout << yaml;
            } else {
                std::ofstream out(ay_out);
                out << yaml;
                std::cout << "wrote " << ay_out << "\n";
            }
            return 0;
        }

        if (serve->parsed())
            return run_serve(sv_config, sv_listen, sv_port, sv_token, sv_runtime, sv_socket,
                             sv_image_bins, sv_out_dir, sv_centralized);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
