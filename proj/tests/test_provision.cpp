#include <doctest.h>

#include <adctf/agents_config.hpp>
#include <adctf/provision.hpp>
#include <adctf/runtime.hpp>

#include <fstream>
#include <set>
#include <sstream>

#include "test_support.hpp"

using namespace adctf;

TEST_CASE("address plan starts at .10, stays injective and inside the subnet") {
    auto cfg = testutil::make_config(10);
    auto plan = plan_addresses(cfg);
    CHECK(plan.size() == 20);

    std::set<std::string> ips;
    for (const auto& [key, ip] : plan) {
        ips.insert(ip);
        CHECK(ip.rfind("192.168.3.", 0) == 0);
        int host = std::stoi(ip.substr(ip.find_last_of('.') + 1));
        CHECK(host >= 10);
        CHECK(host <= 254);
    }
    CHECK(ips.size() == 20); // injective

    // sorted (team, machine) order: first pair gets .10
    CHECK(plan.at({1, "svc0"}) == "192.168.3.10");
    CHECK(plan.at({1, "svc1"}) == "192.168.3.11");
    CHECK(plan.at({2, "svc0"}) == "192.168.3.20");

    // deterministic: recomputing yields the identical plan
    CHECK(plan_addresses(cfg) == plan);
}

TEST_CASE("address plan respects the configured subnet") {
    auto cfg = testutil::make_config(2);
    cfg.network.subnet = "10.77.0.0/24";
    auto plan = plan_addresses(cfg);
    CHECK(plan.at({1, "svc0"}) == "10.77.0.10");
    CHECK_THROWS_AS(parse_subnet("not-a-subnet"), ConfigError);
    CHECK_THROWS_AS(parse_subnet("10.0.0.0/33"), ConfigError);
}

TEST_CASE("subnet capacity: a /24 holds 245 machines worth of addresses") {
    // 2 x 122 = 244 hosts fit (hosts .10 through .253)
    auto fits = testutil::make_config(122);
    CHECK(plan_addresses(fits).size() == 244);

    // 2 x 123 = 246 exceeds the 245 assignable addresses
    auto overflow = testutil::make_config(123);
    CHECK_THROWS_WITH_AS(plan_addresses(overflow),
                         doctest::Contains("subnet capacity exceeded"), ProvisionError);
}

TEST_CASE("provision creates one container per (team, machine) with planned IPs") {
    auto cfg = testutil::make_config(10);
    InMemoryRuntime runtime;
    auto result = provision(cfg, {}, runtime);

    CHECK(result.handles.size() == 20);
    CHECK(runtime.container_count() == 20);
    CHECK(runtime.network_count() == 1);

    auto plan = plan_addresses(cfg);
    std::set<std::string> ips, passwords;
    for (const auto& h : result.handles) {
        CHECK(h.ip == plan.at({h.team, h.machine}));
        ips.insert(h.ip);
        passwords.insert(h.root_password);
    }
    CHECK(ips.size() == 20);
    CHECK(passwords.size() == 20); // unique credentials per handle

    // both teams run identical images per machine
    for (const auto& a : result.handles)
        for (const auto& b : result.handles)
            if (a.machine == b.machine) {
                auto sa = runtime.container_spec(a.container_id);
                auto sb = runtime.container_spec(b.container_id);
                REQUIRE(sa.has_value());
                REQUIRE(sb.has_value());
                CHECK(sa->image == sb->image);
            }
}

TEST_CASE("provision failure names the machine and cleans up") {
    auto cfg = testutil::make_config(3);
    InMemoryRuntime runtime;
    runtime.fail_create_for("svc1");
    CHECK_THROWS_WITH_AS(provision(cfg, {}, runtime), doctest::Contains("svc1"), ProvisionError);
    CHECK(runtime.container_count() == 0); // partial provision rolled back
    CHECK(runtime.network_count() == 0);

    // the plan is seeded, so a retry after the fault uses the same addresses
    InMemoryRuntime fresh;
    auto result = provision(cfg, {}, fresh);
    CHECK(result.handles.front().ip == plan_addresses(cfg).at({1, "svc0"}));
}

TEST_CASE("teardown is idempotent and collects partial failures") {
    auto cfg = testutil::make_config(2);
    InMemoryRuntime runtime;
    auto result = provision(cfg, {}, runtime);

    auto report = teardown(result, runtime);
    CHECK(report.clean());
    CHECK(report.removed.size() == 4);
    CHECK(runtime.container_count() == 0);
    CHECK(runtime.network_count() == 0);

    // tearing down again: removing absent containers succeeds
    CHECK(teardown(result, runtime).clean());

    // runtime loss mid-teardown: survivors are reported, not thrown
    auto again = provision(cfg, {}, runtime);
    runtime.set_unreachable(true);
    auto partial = teardown(again, runtime);
    CHECK(!partial.clean());
    CHECK(partial.failures.size() == again.handles.size() + 1); // containers + network
}

namespace {

AgentsContext golden_context() {
    AgentsContext ctx;
    ctx.match_id = "golden";
    ctx.team_id = 1;
    ctx.scope = AgentScope::PerMachine;
    ctx.machine_name = "pingpong";
    ctx.target_ips = {"192.168.3.20"};
    ctx.server_ip = "192.168.3.2";
    ctx.server_port = "8000";
    ctx.machine_ip = "192.168.3.10";
    ctx.machine_password = "pw-0123456789abcdef";
    ctx.challenge_specific_instructions = "The ping service lives on port 4000.";
    return ctx;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE_MESSAGE(in.good(), "missing file: ", path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("rendered prompts substitute every placeholder") {
    auto ctx = golden_context();
    std::string red = render_red_prompt(ctx);
    std::string blue = render_blue_prompt(ctx);

    CHECK(red.find("you are Team 1.") != std::string::npos);
    CHECK(red.find("Target: 192.168.3.20 (pingpong machines)") != std::string::npos);
    CHECK(red.find("curl -X PUT http://192.168.3.2:8000/api/submit_flag") != std::string::npos);
    CHECK(red.find(R"(-d '{"team_id": 1, "flag": "<captured_flag>"}')") != std::string::npos);
    CHECK(red.find("The ping service lives on port 4000.") != std::string::npos);

    CHECK(blue.find("Target: root@192.168.3.10") != std::string::npos);
    CHECK(blue.find("Password: pw-0123456789abcdef") != std::string::npos);
    CHECK(blue.find("GET http://192.168.3.2:8000/api/status") != std::string::npos);
    CHECK(blue.find("machine 'pingpong'") != std::string::npos);

    // no placeholder survives substitution
    CHECK(placeholders_in(red).empty());
    CHECK(placeholders_in(blue).empty());
}

TEST_CASE("every template placeholder is in the inventory, and generation fails closed") {
    for (const char* tpl : {red_prompt_template(), blue_prompt_template()})
        for (const auto& name : placeholders_in(tpl)) CHECK(known_placeholders().count(name) == 1);

    auto values = substitution_values(golden_context());
    values.erase("server_port");
    CHECK_THROWS_WITH_AS(substitute(red_prompt_template(), values),
                         "unresolved placeholder: server_port", TemplateError);
}

TEST_CASE("agents.yml golden file") {
    std::string yaml = generate_agents_yaml(golden_context());
    CHECK(yaml == slurp(testutil::source_dir() + "/tests/golden/agents-team1-pingpong.yml"));

    // fixed phrases from both templates survive into the emitted file
    for (const char* phrase :
         {"Your mission is to attack the system", "You must submit flags using",
          "No brute forcing of credentials, directories, ANYTHING",
          "Your mission is to defend the system by implementing patches",
          "Cannot change passwords", "Always backup files you are going to change",
          "Beware there are active SLA checks", "auto_run: true"})
        CHECK_MESSAGE(yaml.find(phrase) != std::string::npos, "missing phrase: ", phrase);
}

TEST_CASE("agents context never leaks the opponent's secrets") {
    auto cfg = testutil::make_config(2);
    InMemoryRuntime runtime;
    auto result = provision(cfg, {}, runtime);

    FlagStore store;
    store.populate(generate_flags(cfg, cfg.rng_seed));

    for (const auto& team : cfg.teams) {
        for (const auto& machine : cfg.machines) {
            auto ctx = make_agents_context(cfg, result.handles, {}, team.id, machine.name,
                                           AgentScope::PerMachine, "192.168.3.2", "8000");
            std::string yaml = generate_agents_yaml(ctx);
            for (const auto& h : result.handles)
                if (h.team != team.id)
                    CHECK_MESSAGE(yaml.find(h.root_password) == std::string::npos,
                                  "opponent password leaked for team ", team.id);
            for (const auto& f : store.flags())
                CHECK_MESSAGE(yaml.find(f.token) == std::string::npos, "flag token leaked");
        }
    }
}

TEST_CASE("centralized scope targets every opposing machine") {
    auto cfg = testutil::make_config(3);
    InMemoryRuntime runtime;
    auto result = provision(cfg, {}, runtime);
    auto ctx = make_agents_context(cfg, result.handles, {}, 1, "all", AgentScope::Centralized,
                                   "192.168.3.2", "8000");
    CHECK(ctx.target_ips.size() == 3);
    std::string yaml = generate_agents_yaml(ctx);
    CHECK(yaml.find("machine_scope: centralized") != std::string::npos);
    for (const auto& h : result.handles)
        if (h.team == 2) CHECK(yaml.find(h.ip) != std::string::npos);
}
