#pragma once

#include <memory>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "engine.hpp"

namespace adctf {

inline nlohmann::json status_to_json(const StatusSnapshot& snap) {
    nlohmann::json teams = nlohmann::json::array();
    for (const auto& t : snap.teams) {
        nlohmann::json machines = nlohmann::json::array();
        for (const auto& m : t.machines)
            machines.push_back({{"machine", m.machine},
                                {"service_status", to_string(m.status)},
                                {"score", m.score}});
        teams.push_back({{"team_id", t.team_id},
                         {"name", t.name},
                         {"total", t.total},
                         {"machines", std::move(machines)}});
    }
    nlohmann::json j{{"match_id", snap.match_id},
                     {"phase", to_string(snap.phase)},
                     {"current_round", snap.current_round},
                     {"teams", std::move(teams)}};
    j["end_reason"] = snap.end_reason ? nlohmann::json(to_string(*snap.end_reason))
                                      : nlohmann::json(nullptr);
    return j;
}

// HTTP control plane: flag submission, status, and the authenticated manual
// stop. Rejections ride a 200 with a result field, since agents parse bodies;
// protocol-level faults use 4xx.
class ApiServer {
public:
    ApiServer(Engine& engine, std::string admin_token)
        : engine_(engine), admin_token_(std::move(admin_token)) {
        svr_.Put("/api/submit_flag", [this](const httplib::Request& req, httplib::Response& res) {
            handle_submit(req, res);
        });
        svr_.Get("/api/status", [this](const httplib::Request&, httplib::Response& res) {
            res.status = 200;
            reply(res, status_to_json(*engine_.snapshot()));
        });
        svr_.Post("/api/stop", [this](const httplib::Request& req, httplib::Response& res) {
            handle_stop(req, res);
        });
    }

    // Binds an ephemeral port and serves from a background thread (tests, and
    // deployments that let the OS pick).
    int start_any_port(const std::string& host = "127.0.0.1") {
        port_ = svr_.bind_to_any_port(host);
        if (port_ <= 0) throw std::runtime_error("cannot bind api server on " + host);
        serve_thread_ = std::thread([this]() { svr_.listen_after_bind(); });
        svr_.wait_until_ready();
        return port_;
    }

    bool start(const std::string& host, int port) {
        if (!svr_.bind_to_port(host, port)) return false;
        port_ = port;
        serve_thread_ = std::thread([this]() { svr_.listen_after_bind(); });
        svr_.wait_until_ready();
        return true;
    }

    void stop() {
        svr_.stop();
        if (serve_thread_.joinable()) serve_thread_.join();
    }

    ~ApiServer() { stop(); }

    int port() const { return port_; }

private:
    static void reply(httplib::Response& res, const nlohmann::json& body) {
        res.set_content(body.dump(), "application/json");
    }

    void handle_submit(const httplib::Request& req, httplib::Response& res) {
        nlohmann::json body;
        try {
            body = nlohmann::json::parse(req.body);
        } catch (const nlohmann::json::exception&) {
            res.status = 400;
            reply(res, {{"error", "body must be JSON"}});
            return;
        }
        if (!body.is_object() || !body.contains("team_id") ||
            !body.at("team_id").is_number_integer() || !body.contains("flag") ||
            !body.at("flag").is_string()) {
            res.status = 400;
            reply(res, {{"error", "expected {\"team_id\": <int>, \"flag\": \"<string>\"}"}});
            return;
        }
        const int team_id = body.at("team_id").get<int>();
        if (!find_team(engine_.config(), team_id)) {
            res.status = 404;
            reply(res, {{"error", "unknown team_id"}});
            return;
        }
        SubmissionRecord rec = engine_.submit_flag(team_id, body.at("flag").get<std::string>());
        res.status = 200;
        switch (rec.outcome) {
        case SubmissionOutcome::AcceptedUser:
            reply(res, {{"result", "accepted"}, {"points", engine_.config().scoring.user_flag_points}});
            break;
        case SubmissionOutcome::AcceptedRoot:
            reply(res, {{"result", "accepted"}, {"points", engine_.config().scoring.root_flag_points}});
            break;
        case SubmissionOutcome::RejectedSelf:
            reply(res, {{"result", "rejected"}, {"reason", "self"}});
            break;
        case SubmissionOutcome::RejectedDuplicate:
            reply(res, {{"result", "rejected"}, {"reason", "duplicate"}});
            break;
        case SubmissionOutcome::RejectedUnknown:
            reply(res, {{"result", "rejected"}, {"reason", "unknown"}});
            break;
        case SubmissionOutcome::RejectedMatchEnded:
            reply(res, {{"result", "rejected"}, {"reason", "match_ended"}});
            break;
        }
    }

    // Agents must not be able to stop matches: the stop endpoint wants the
    // operator's bearer token.
    void handle_stop(const httplib::Request& req, httplib::Response& res) {
        const std::string auth = req.get_header_value("Authorization");
        if (admin_token_.empty() || auth != "Bearer " + admin_token_) {
            res.status = 401;
            reply(res, {{"error", "invalid admin token"}});
            return;
        }
        if (engine_.phase() != MatchPhase::Running) {
            res.status = 409;
            reply(res, {{"error", "match not running"}});
            return;
        }
        engine_.manual_stop();
        res.status = 200;
        reply(res, {{"result", "stopped"}, {"end_reason", to_string(EndReason::ManualStop)}});
    }

    Engine& engine_;
    std::string admin_token_;
    httplib::Server svr_;
    std::thread serve_thread_;
    int port_ = 0;
};

} // namespace adctf
