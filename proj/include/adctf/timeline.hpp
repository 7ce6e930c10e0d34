#pragma once

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "events.hpp"

namespace adctf {

struct StatusSegment {
    Verdict status = Verdict::Ok;
    millis start = 0;
    millis end = 0;
};

struct CaptureMarker {
    millis at = 0;
    int captor_team = 0;
    FlagKind kind = FlagKind::User;
};

struct TimelineLane {
    int team = 0;
    std::string machine;
    std::vector<StatusSegment> segments; // tile [match start, match end] without gaps
    std::vector<CaptureMarker> markers;
};

struct TimelineView {
    std::string match_id;
    millis start = 0;
    millis end = 0;
    std::vector<int> teams;
    std::vector<std::string> machines;
    std::vector<TimelineLane> lanes; // machine-major, team order within
};

// Reconstructs per-(team, machine) status ribbons and capture markers from an
// event log. Services are healthy until the first recorded transition; capture
// markers land on the victim's lane for the machine the flag lived on.
inline TimelineView build_timeline(const std::vector<MatchEvent>& events) {
    const MatchStartedEvent* started = nullptr;
    for (const auto& ev : events)
        if ((started = std::get_if<MatchStartedEvent>(&ev))) break;
    if (!started) throw std::runtime_error("event log has no match_started record");

    TimelineView view;
    view.match_id = started->match_id;
    view.start = started->at;
    view.end = started->at;
    view.teams = started->teams;
    view.machines = started->machines;

    for (const auto& ev : events) view.end = std::max(view.end, event_time(ev));
    for (const auto& ev : events)
        if (const auto* ended = std::get_if<MatchEndedEvent>(&ev)) view.end = ended->at;

    std::map<std::pair<int, std::string>, TimelineLane> lanes;
    for (const auto& machine : view.machines)
        for (int team : view.teams) {
            TimelineLane lane;
            lane.team = team;
            lane.machine = machine;
            lanes[{team, machine}] = std::move(lane);
        }

    std::map<std::pair<int, std::string>, StatusSegment> open;
    for (auto& [key, lane] : lanes) {
        (void)lane;
        open[key] = StatusSegment{Verdict::Ok, view.start, view.start};
    }

    for (const auto& ev : events) {
        if (const auto* sc = std::get_if<StatusChangeEvent>(&ev)) {
            auto key = std::make_pair(sc->team, sc->machine);
            auto it = open.find(key);
            if (it == open.end()) continue; // change for a pair outside the match header
            StatusSegment& cur = it->second;
            if (sc->at > cur.start) {
                cur.end = sc->at;
                lanes[key].segments.push_back(cur);
            }
            cur = StatusSegment{sc->to, sc->at, sc->at};
        } else if (const auto* cap = std::get_if<FlagCaptureEvent>(&ev)) {
            auto key = std::make_pair(cap->victim_team, cap->machine);
            auto it = lanes.find(key);
            if (it != lanes.end())
                it->second.markers.push_back(CaptureMarker{cap->at, cap->team, cap->flag_kind});
        }
    }
    for (auto& [key, cur] : open) {
        if (view.end > cur.start || lanes[key].segments.empty()) {
            cur.end = std::max(view.end, cur.start);
            lanes[key].segments.push_back(cur);
        }
    }

    for (const auto& machine : view.machines)
        for (int team : view.teams) view.lanes.push_back(std::move(lanes[{team, machine}]));
    return view;
}

inline TimelineView build_timeline(const std::string& serialized_log) {
    return build_timeline(parse_event_log(serialized_log));
}

} // namespace adctf
