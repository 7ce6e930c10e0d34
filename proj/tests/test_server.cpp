#include <doctest.h>

#include <adctf/server.hpp>

#include <httplib.h>

#include "test_support.hpp"

using namespace adctf;

namespace {

struct LiveServer {
    VirtualClock clock;
    Engine engine;
    SimEnvironment env;
    ApiServer server;
    int port;

    explicit LiveServer(MatchConfig cfg, const std::string& token = "secret")
        : engine(std::move(cfg), clock), server(engine, token), port(0) {
        engine.start(env);
        port = server.start_any_port();
    }

    httplib::Client client() { return httplib::Client("127.0.0.1", port); }

    std::string token_of(int owner, const std::string& machine, FlagKind kind) {
        for (const auto& f : engine.flag_store().flags())
            if (f.owner_team == owner && f.machine == machine && f.kind == kind) return f.token;
        return "";
    }
};

} // namespace

TEST_CASE("submit_flag accepts the documented request shape verbatim") {
    LiveServer live(testutil::make_config(2));
    auto cli = live.client();

    // exactly the body shape the red briefing prints
    std::string body = "{\"team_id\": 1, \"flag\": \"" + live.token_of(2, "svc0", FlagKind::User) +
                       "\"}";
    auto res = cli.Put("/api/submit_flag", body, "application/json");
    REQUIRE(res);
    CHECK(res->status == 200);
    auto j = nlohmann::json::parse(res->body);
    CHECK(j.at("result") == "accepted");
    CHECK(j.at("points") == 100);

    auto root = cli.Put("/api/submit_flag",
                        nlohmann::json{{"team_id", 1},
                                       {"flag", live.token_of(2, "svc1", FlagKind::Root)}}
                            .dump(),
                        "application/json");
    CHECK(nlohmann::json::parse(root->body).at("points") == 200);
}

TEST_CASE("submit_flag rejection reasons ride 200 responses") {
    LiveServer live(testutil::make_config(1));
    auto cli = live.client();
    auto submit = [&](int team, const std::string& flag) {
        auto res = cli.Put("/api/submit_flag",
                           nlohmann::json{{"team_id", team}, {"flag", flag}}.dump(),
                           "application/json");
        REQUIRE(res);
        REQUIRE(res->status == 200);
        return nlohmann::json::parse(res->body);
    };

    auto own = submit(1, live.token_of(1, "svc0", FlagKind::User));
    CHECK(own.at("result") == "rejected");
    CHECK(own.at("reason") == "self");

    CHECK(submit(1, "FLAG{eeeeeeeeeeeeeeeeeeeeeeeeeeeeeeee}").at("reason") == "unknown");

    std::string enemy = live.token_of(2, "svc0", FlagKind::User);
    CHECK(submit(1, enemy).at("result") == "accepted");
    CHECK(submit(1, enemy).at("reason") == "duplicate");

    live.engine.manual_stop();
    CHECK(submit(1, live.token_of(2, "svc0", FlagKind::Root)).at("reason") == "match_ended");
}

TEST_CASE("submit_flag protocol errors use 4xx") {
    LiveServer live(testutil::make_config(1));
    auto cli = live.client();

    CHECK(cli.Put("/api/submit_flag", "not json", "application/json")->status == 400);
    CHECK(cli.Put("/api/submit_flag", R"({"team_id": "x"})", "application/json")->status == 400);
    CHECK(cli.Put("/api/submit_flag", R"({"team_id": 1})", "application/json")->status == 400);
    CHECK(cli.Put("/api/submit_flag", R"({"flag": "FLAG{a}"})", "application/json")->status == 400);
    CHECK(cli.Put("/api/submit_flag", R"({"team_id": 99, "flag": "FLAG{a}"})", "application/json")
              ->status == 404);
}

TEST_CASE("status exposes phase, round, per-machine service_status and score") {
    LiveServer live(testutil::make_config(2));
    auto cli = live.client();

    // before round 0 completes every service reads OK
    auto before = nlohmann::json::parse(cli.Get("/api/status")->body);
    CHECK(before.at("phase") == "RUNNING");
    CHECK(before.at("current_round") == 0);
    CHECK(before.at("end_reason").is_null());
    REQUIRE(before.at("teams").size() == 2);
    for (const auto& team : before.at("teams"))
        for (const auto& m : team.at("machines")) {
            CHECK(m.at("service_status") == "OK");
            CHECK(m.at("score") == 0);
        }

    // a DOWN round decrements that machine by 5 and flips its status
    live.env.scripted().set_status(2, "svc0", Verdict::Down);
    live.engine.run_next_round(live.env.backend());
    auto after = nlohmann::json::parse(cli.Get("/api/status")->body);
    CHECK(after.at("current_round") == 1);
    for (const auto& team : after.at("teams")) {
        for (const auto& m : team.at("machines")) {
            if (team.at("team_id") == 2 && m.at("machine") == "svc0") {
                CHECK(m.at("service_status") == "DOWN");
                CHECK(m.at("score") == -5);
            } else {
                CHECK(m.at("service_status") == "OK");
                CHECK(m.at("score") == 13);
            }
        }
        if (team.at("team_id") == 1) CHECK(team.at("total") == 26);
        if (team.at("team_id") == 2) CHECK(team.at("total") == 8);
    }

    live.engine.manual_stop();
    auto ended = nlohmann::json::parse(cli.Get("/api/status")->body);
    CHECK(ended.at("phase") == "ENDED");
    CHECK(ended.at("end_reason") == "MANUAL_STOP");
}

TEST_CASE("stop wants the admin bearer token") {
    LiveServer live(testutil::make_config(1), "hunter2");
    auto cli = live.client();

    CHECK(cli.Post("/api/stop", "", "text/plain")->status == 401);

    httplib::Headers wrong{{"Authorization", "Bearer nope"}};
    CHECK(cli.Post("/api/stop", wrong, "", "text/plain")->status == 401);
    CHECK(live.engine.phase() == MatchPhase::Running);

    httplib::Headers good{{"Authorization", "Bearer hunter2"}};
    auto res = cli.Post("/api/stop", good, "", "text/plain");
    CHECK(res->status == 200);
    CHECK(nlohmann::json::parse(res->body).at("end_reason") == "MANUAL_STOP");
    CHECK(live.engine.phase() == MatchPhase::Ended);
    CHECK(live.engine.end_reason() == EndReason::ManualStop);

    CHECK(cli.Post("/api/stop", good, "", "text/plain")->status == 409);
}
