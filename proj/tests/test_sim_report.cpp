#include <doctest.h>

#include <adctf/report.hpp>
#include <adctf/sim.hpp>
#include <adctf/svg.hpp>
#include <adctf/timeline.hpp>

#include <set>

#include "test_support.hpp"

using namespace adctf;

namespace {

BotScript blue(int team, const std::string& machine, std::vector<std::pair<millis, Verdict>> actions) {
    BotScript s;
    s.team = team;
    s.role = BotRole::Blue;
    s.machine = machine;
    for (auto [at, v] : actions) {
        BotAction a;
        a.at_ms = at;
        a.action = SetStatusAction{v};
        s.actions.push_back(a);
    }
    return s;
}

BotScript red(int team, std::vector<std::pair<millis, FlagRef>> submissions) {
    BotScript s;
    s.team = team;
    s.role = BotRole::Red;
    for (auto& [at, ref] : submissions) {
        BotAction a;
        a.at_ms = at;
        a.action = SubmitAction{ref, ""};
        s.actions.push_back(a);
    }
    return s;
}

} // namespace

TEST_CASE("empty scripts: full-length tie with perfect defense") {
    auto cfg = testutil::make_config(2);
    auto result = run_simulated_match(cfg, {});
    CHECK(result.end_reason == EndReason::TimeLimit);
    CHECK(result.rounds_completed == 20);
    // 20 rounds x 13 points x 2 machines per team
    for (int team : {1, 2}) CHECK(total_for_team(result.totals, team) == 520);

    auto summary = summarize_match(parse_event_log(result.log));
    for (const auto& outcome : machine_outcomes(summary))
        CHECK(outcome.result_for_team_a == Outcome::Tie);

    // a fully healthy match scores nothing but DEFENSE_OK
    for (const auto& ev : parse_event_log(result.log))
        if (const auto* s = std::get_if<ScoreAppliedEvent>(&ev))
            CHECK(s->score.kind == ScoreKind::DefenseOk);
}

TEST_CASE("identical (config, scripts, seed) give byte-identical logs") {
    auto cfg = testutil::make_config(3);
    auto scripts = make_random_scripts(cfg, 2024);
    std::set<std::size_t> hashes;
    std::string first_log;
    for (int run = 0; run < 5; ++run) {
        auto result = run_simulated_match(cfg, scripts);
        if (run == 0) first_log = result.log;
        CHECK(result.log == first_log);
        hashes.insert(std::hash<std::string>{}(result.log));
    }
    CHECK(hashes.size() == 1);
}

TEST_CASE("root sweep script ends the match early") {
    auto cfg = testutil::make_config(2);
    auto scripts = std::vector<BotScript>{
        red(1, {{400 * second_ms, FlagRef{2, "svc0", FlagKind::Root}},
                {410 * second_ms, FlagRef{2, "svc1", FlagKind::Root}}})};
    auto result = run_simulated_match(cfg, scripts);
    CHECK(result.end_reason == EndReason::RootSweep);
    // rounds 0..6 fired at 0..360 s; the sweep landed before the 420 s tick
    CHECK(result.rounds_completed == 7);
    CHECK(total_for_team(result.totals, 1) == 7 * 13 * 2 + 400);
    CHECK(total_for_team(result.totals, 2) == 7 * 13 * 2);
}

TEST_CASE("scripted self and duplicate submissions never score") {
    auto cfg = testutil::make_config(1);
    std::vector<BotScript> scripts;
    scripts.push_back(red(1, {{10 * second_ms, FlagRef{1, "svc0", FlagKind::User}},   // self
                              {20 * second_ms, FlagRef{2, "svc0", FlagKind::User}},   // valid
                              {30 * second_ms, FlagRef{2, "svc0", FlagKind::User}}})); // duplicate
    auto result = run_simulated_match(cfg, scripts);

    int accepted = 0, self = 0, dup = 0;
    for (const auto& rec : result.submissions) {
        if (adctf::accepted(rec.outcome)) ++accepted;
        if (rec.outcome == SubmissionOutcome::RejectedSelf) ++self;
        if (rec.outcome == SubmissionOutcome::RejectedDuplicate) ++dup;
    }
    CHECK(accepted == 1);
    CHECK(self == 1);
    CHECK(dup == 1);
    CHECK(total_for_team(result.totals, 1) == 20 * 13 + 100);
}

TEST_CASE("blue degrade/patch cycles shape the timeline and the score") {
    auto cfg = testutil::make_config(1, 60 * second_ms, 10 * minute_ms);
    // DOWN for rounds 5..7, healthy again from round 8
    std::vector<BotScript> scripts{
        blue(1, "svc0", {{5 * minute_ms, Verdict::Down}, {8 * minute_ms, Verdict::Ok}})};
    auto result = run_simulated_match(cfg, scripts);
    CHECK(result.rounds_completed == 10);
    CHECK(total_for_team(result.totals, 1) == 7 * 13 - 3 * 5);
    CHECK(total_for_team(result.totals, 2) == 10 * 13);

    auto view = build_timeline(result.log);
    REQUIRE(view.lanes.size() == 2);
    const TimelineLane* lane = nullptr;
    for (const auto& l : view.lanes)
        if (l.team == 1) lane = &l;
    REQUIRE(lane != nullptr);
    REQUIRE(lane->segments.size() == 3); // OK, DOWN, OK
    CHECK(lane->segments[0].status == Verdict::Ok);
    CHECK(lane->segments[1].status == Verdict::Down);
    CHECK(lane->segments[2].status == Verdict::Ok);

    // segments tile the match duration exactly
    for (const auto& l : view.lanes) {
        CHECK(l.segments.front().start == view.start);
        CHECK(l.segments.back().end == view.end);
        for (std::size_t i = 1; i < l.segments.size(); ++i)
            CHECK(l.segments[i].start == l.segments[i - 1].end);
    }
}

TEST_CASE("capture markers land on the victim lane at the capture instant") {
    auto cfg = testutil::make_config(1);
    std::vector<BotScript> scripts{red(1, {{400 * second_ms, FlagRef{2, "svc0", FlagKind::User}}})};
    auto result = run_simulated_match(cfg, scripts);
    auto view = build_timeline(result.log);

    const TimelineLane* victim = nullptr;
    for (const auto& l : view.lanes)
        if (l.team == 2) victim = &l;
    REQUIRE(victim != nullptr);
    REQUIRE(victim->markers.size() == 1);
    CHECK(victim->markers[0].at == view.start + 400 * second_ms);
    CHECK(victim->markers[0].captor_team == 1);
    CHECK(victim->markers[0].kind == FlagKind::User);
}

TEST_CASE("a ten-machine match renders twenty lanes and a deterministic SVG") {
    auto cfg = testutil::make_config(10);
    auto scripts = make_random_scripts(cfg, 7);
    auto result = run_simulated_match(cfg, scripts);
    auto view = build_timeline(result.log);
    CHECK(view.lanes.size() == 20);

    std::string svg = render_timeline_svg(view);
    CHECK(svg == render_timeline_svg(view)); // byte-identical
    CHECK(svg.find("<svg") == 0);
    CHECK(svg.rfind("</svg>\n") == svg.size() - 7);
    // every lane is labeled
    for (const auto& lane : view.lanes)
        CHECK(svg.find(lane.machine + " / team " + std::to_string(lane.team)) != std::string::npos);

    // empty match: lanes are solid healthy ribbons (legend colors aside)
    auto quiet = run_simulated_match(testutil::make_config(2), {});
    std::string quiet_svg = render_timeline_svg(build_timeline(quiet.log));
    CHECK(quiet_svg.find("<title>MUMBLE</title>") == std::string::npos);
    CHECK(quiet_svg.find("<title>DOWN</title>") == std::string::npos);
    CHECK(quiet_svg.find("<title>OK</title>") != std::string::npos);
}

TEST_CASE("scripts referencing unknown machines are rejected before start") {
    auto cfg = testutil::make_config(1);
    std::vector<BotScript> scripts{red(1, {{0, FlagRef{2, "ghost", FlagKind::User}}})};
    CHECK_THROWS_AS(run_simulated_match(cfg, scripts), ScriptError);

    std::vector<BotScript> bad_role{blue(1, "svc0", {{0, Verdict::Down}})};
    bad_role[0].actions[0].action = SubmitAction{std::nullopt, "FLAG{x}"};
    CHECK_THROWS_AS(run_simulated_match(cfg, bad_role), ScriptError);

    std::vector<BotScript> decreasing{blue(1, "svc0", {{60000, Verdict::Down}, {0, Verdict::Ok}})};
    CHECK_THROWS_AS(run_simulated_match(cfg, decreasing), ScriptError);
}

TEST_CASE("script JSON round trip") {
    nlohmann::json j = {
        {"bots",
         {{{"team", 1},
           {"role", "red"},
           {"actions",
            {{{"at_s", 120}, {"submit_flag_of", {{"team", 2}, {"machine", "svc0"}, {"kind", "ROOT"}}}},
             {{"at_s", 130}, {"submit_token", "FLAG{bogus}"}}}}},
          {{"team", 2},
           {"role", "blue"},
           {"machine", "svc0"},
           {"actions", {{{"at_s", 300}, {"set_status", "MUMBLE"}}}}}}}};
    auto scripts = scripts_from_json(j);
    REQUIRE(scripts.size() == 2);
    CHECK(scripts[0].role == BotRole::Red);
    CHECK(scripts[0].actions.size() == 2);
    CHECK(scripts[1].role == BotRole::Blue);
    CHECK(std::get<SetStatusAction>(scripts[1].actions[0].action).status == Verdict::Mumble);

    nlohmann::json bad = {{"bots", {{{"team", 1}, {"role", "pink"}}}}};
    CHECK_THROWS_AS(scripts_from_json(bad), ScriptError);
}

TEST_CASE("wtl report over simulated matches") {
    // team 1 wins svc0 (capture), loses svc1 (its service stays DOWN), ties nothing
    auto cfg = testutil::make_config(2);
    std::vector<BotScript> scripts{
        red(1, {{100 * second_ms, FlagRef{2, "svc0", FlagKind::Root}}}),
        blue(1, "svc1", {{0, Verdict::Down}})};
    auto result = run_simulated_match(cfg, scripts);

    auto summary = summarize_match(parse_event_log(result.log));
    auto report = report_wtl({summary});
    REQUIRE(report.rows.size() == 1);
    REQUIRE(report.rows[0].outcomes.size() == 2);
    CHECK(report.rows[0].outcomes[0].machine == "svc0");
    CHECK(report.rows[0].outcomes[0].result_for_team_a == Outcome::Win);
    CHECK(report.rows[0].outcomes[1].result_for_team_a == Outcome::Loss);
    CHECK(report.rows[0].percent.win == 50);
    CHECK(report.rows[0].percent.loss == 50);

    std::string text = wtl_to_text(report);
    CHECK(text.find("W/T/L %: 50 / 0 / 50") != std::string::npos);
    auto j = wtl_to_json(report);
    CHECK(j.at("matches")[0].at("wtl_percent").at("win") == 50);
}

TEST_CASE("incomplete logs are excluded from reports with a warning") {
    auto cfg = testutil::make_config(1);
    auto result = run_simulated_match(cfg, {});
    // strip the match_ended line
    std::string truncated = result.log.substr(0, result.log.rfind("{\"at\""));
    auto summary = summarize_match(parse_event_log(truncated));
    CHECK(!summary.complete);
    auto report = report_wtl({summary});
    CHECK(report.rows.empty());
    REQUIRE(report.skipped.size() == 1);
    CHECK(wtl_to_text(report).find("warning: skipped incomplete match") != std::string::npos);
}

TEST_CASE("score distribution equals the ledger fold and composes totals") {
    auto cfg = testutil::make_config(2);
    auto scripts = make_random_scripts(cfg, 11);
    auto result = run_simulated_match(cfg, scripts);
    auto summary = summarize_match(parse_event_log(result.log));
    auto dist = report_score_distribution({summary});
    REQUIRE(dist.matches.size() == 1);
    for (const auto& row : dist.matches[0].teams) {
        CHECK(row.total == total_for_team(result.totals, row.team));
        for (const auto& [machine, pts] : row.per_machine) {
            auto it = result.totals.find({row.team, machine});
            CHECK(pts == (it == result.totals.end() ? 0 : it->second));
        }
    }
}

TEST_CASE("stacked totals: 347 + 404 make a 751-point match") {
    MatchSummary s;
    s.match_id = "stacked";
    s.teams = {1, 2};
    s.machines = {"cowsay", "pingpong"};
    s.totals[{1, "cowsay"}] = 347;
    s.totals[{1, "pingpong"}] = 404;
    s.totals[{2, "cowsay"}] = 100;
    s.totals[{2, "pingpong"}] = 100;
    s.complete = true;
    auto dist = report_score_distribution({s});
    REQUIRE(dist.matches.size() == 1);
    const auto& team1 = dist.matches[0].teams[0];
    CHECK(team1.team == 1);
    CHECK(team1.total == 751);
    CHECK(dist.matches[0].match_total == 951);
    CHECK(dist.share_of_sums.at(1) == doctest::Approx(100.0 * 751 / 951));
}

TEST_CASE("replayed totals equal engine totals across random bot matches") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto cfg = testutil::make_config(2);
        cfg.rng_seed = seed;
        auto scripts = make_random_scripts(cfg, seed * 31 + 1);
        auto result = run_simulated_match(cfg, scripts);
        CHECK(replay_totals(parse_event_log(result.log)) == result.totals);

        // attack points per team per machine stay in {0, 100, 200, 300}
        auto summary = summarize_match(parse_event_log(result.log));
        std::map<std::pair<int, std::string>, int> attack;
        for (const auto& ev : parse_event_log(result.log))
            if (const auto* s = std::get_if<ScoreAppliedEvent>(&ev))
                if (!s->score.round) attack[{s->score.team, s->score.machine}] += s->score.delta;
        for (const auto& [key, points] : attack)
            CHECK((points == 0 || points == 100 || points == 200 || points == 300));
    }
}
