#pragma once

#include <cstdio>
#include <sstream>
#include <string>

#include "timeline.hpp"

namespace adctf {

namespace svg_detail {

constexpr double lane_height = 22.0;
constexpr double lane_gap = 8.0;
constexpr double label_width = 190.0;
constexpr double plot_width = 920.0;
constexpr double top_margin = 46.0;
constexpr double bottom_margin = 34.0;

inline const char* status_color(Verdict v) {
    switch (v) {
    case Verdict::Ok: return "#2a9d8f";      // teal
    case Verdict::Mumble: return "#f4a261";  // orange
    case Verdict::Down: return "#e63946";    // red
    case Verdict::Corrupt: return "#9d4edd"; // violet
    case Verdict::Error: return "#adb5bd";   // grey
    }
    return "#adb5bd";
}

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

inline std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

} // namespace svg_detail

// One horizontal lane per (machine, team): segment rectangles colored by
// status, triangle markers for captures (orientation by capturing team, red
// border for root flags). Pure function of the view, so identical views render
// byte-identical documents.
inline std::string render_timeline_svg(const TimelineView& view) {
    using namespace svg_detail;
    const double span_ms = view.end > view.start ? static_cast<double>(view.end - view.start) : 1.0;
    const double height =
        top_margin + view.lanes.size() * (lane_height + lane_gap) + bottom_margin;
    const double width = label_width + plot_width + 24.0;
    auto x_of = [&](millis t) {
        return label_width + (static_cast<double>(t - view.start) / span_ms) * plot_width;
    };

    std::ostringstream out;
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << num(width) << "' height='"
        << num(height) << "' viewBox='0 0 " << num(width) << " " << num(height) << "'>\n";
    out << "<style>text{font-family:monospace;font-size:11px;fill:#1d3557;}"
           ".lane-label{dominant-baseline:middle;}"
           ".axis{stroke:#ced4da;stroke-width:1;}"
           ".seg{stroke:#ffffff;stroke-width:0.5;}</style>\n";
    out << "<text x='" << num(label_width) << "' y='16'>match " << escape(view.match_id)
        << ": service status and flag captures</text>\n";

    // minute grid, thinned to at most ~12 labels
    const long long total_min = static_cast<long long>(span_ms / 60000.0 + 0.5);
    long long step_min = 1;
    while (step_min * 12 < total_min) step_min *= 2;
    for (long long m = 0; m <= total_min; m += step_min) {
        const millis t = view.start + m * 60000;
        if (t > view.end) break;
        const double x = x_of(t);
        out << "<line class='axis' x1='" << num(x) << "' y1='" << num(top_margin - 14.0) << "' x2='"
            << num(x) << "' y2='" << num(height - bottom_margin + 6.0) << "'/>\n";
        out << "<text x='" << num(x - 8.0) << "' y='" << num(height - bottom_margin + 20.0) << "'>"
            << m << "m</text>\n";
    }

    double y = top_margin;
    for (const auto& lane : view.lanes) {
        const double mid = y + lane_height / 2.0;
        out << "<text class='lane-label' x='8' y='" << num(mid) << "'>" << escape(lane.machine)
            << " / team " << lane.team << "</text>\n";
        for (const auto& seg : lane.segments) {
            const double x0 = x_of(seg.start);
            const double x1 = x_of(seg.end);
            out << "<rect class='seg' x='" << num(x0) << "' y='" << num(y) << "' width='"
                << num(std::max(x1 - x0, 0.5)) << "' height='" << num(lane_height) << "' fill='"
                << status_color(seg.status) << "'><title>" << to_string(seg.status) << "</title></rect>\n";
        }
        for (const auto& m : lane.markers) {
            const double cx = x_of(m.at);
            const bool up = !view.teams.empty() && m.captor_team == view.teams.front();
            const double tip = up ? y - 2.0 : y + lane_height + 2.0;
            const double base = up ? y + lane_height - 4.0 : y + 4.0;
            const char* stroke = m.kind == FlagKind::Root ? "#d62828" : "#1d3557";
            const double stroke_w = m.kind == FlagKind::Root ? 2.5 : 1.0;
            out << "<polygon points='" << num(cx - 6.0) << "," << num(base) << " " << num(cx + 6.0)
                << "," << num(base) << " " << num(cx) << "," << num(tip)
                << "' fill='#2a9d8f' stroke='" << stroke << "' stroke-width='" << num(stroke_w)
                << "'><title>" << to_string(m.kind) << " flag captured by team " << m.captor_team
                << "</title></polygon>\n";
        }
        y += lane_height + lane_gap;
    }

    // legend
    double lx = label_width;
    const double ly = height - bottom_margin + 26.0;
    for (Verdict v : {Verdict::Ok, Verdict::Mumble, Verdict::Down, Verdict::Corrupt, Verdict::Error}) {
        out << "<rect x='" << num(lx) << "' y='" << num(ly - 9.0)
            << "' width='12' height='12' fill='" << status_color(v) << "'/>\n";
        out << "<text x='" << num(lx + 16.0) << "' y='" << num(ly + 1.0) << "'>" << to_string(v)
            << "</text>\n";
        lx += 90.0;
    }
    out << "</svg>\n";
    return out.str();
}

} // namespace adctf
