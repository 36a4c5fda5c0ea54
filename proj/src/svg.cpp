#include "lanemap/svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lanemap {

namespace {

std::string fmt(double v) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(2);
    out << v;
    std::string s = out.str();
    // Trim trailing zeros for compactness.
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    if (s == "-0") s = "0";
    return s;
}

void open_svg(std::ostringstream& out, double x0, double y0, double w, double h) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << fmt(x0) << " " << fmt(y0)
        << " " << fmt(w) << " " << fmt(h) << "\">\n";
    out << "<rect class=\"frame\" x=\"" << fmt(x0) << "\" y=\"" << fmt(y0) << "\" width=\""
        << fmt(w) << "\" height=\"" << fmt(h)
        << "\" fill=\"#15151e\" stroke=\"#3c3c50\" stroke-width=\"2\"/>\n";
}

void lane_path(std::ostringstream& out, const Polyline& pl, LaneType type, double width) {
    out << "<path fill=\"none\" stroke=\"" << lane_type_color(type) << "\" stroke-width=\""
        << fmt(width) << "\"";
    if (type == LaneType::WhiteDash || type == LaneType::YellowDash) {
        out << " stroke-dasharray=\"14 10\"";
    } else if (type == LaneType::OcclusionOrGap) {
        out << " stroke-dasharray=\"3 6\"";
    }
    out << " d=\"";
    const auto& v = pl.vertices();
    for (std::size_t i = 0; i < v.size(); ++i) {
        out << (i == 0 ? "M" : " L") << fmt(v[i].x) << " " << fmt(v[i].y);
    }
    out << "\"/>\n";
}

}  // namespace

const char* lane_type_color(LaneType type) {
    switch (type) {
        case LaneType::WhiteSolid: return "#f2f2f2";
        case LaneType::WhiteDash: return "#b0bec5";
        case LaneType::YellowSolid: return "#ffc107";
        case LaneType::YellowDash: return "#ff8f00";
        case LaneType::RoadBoundary: return "#e57373";
        case LaneType::Other: return "#7e57c2";
        case LaneType::OcclusionOrGap: return "#4dd0e1";
    }
    return "#ffffff";
}

std::string scene_svg(const Scene& scene, const SvgStyle& style) {
    std::ostringstream out;
    open_svg(out, 0, 0, scene.image_width, scene.image_height);
    for (const SceneLane& lane : scene.lanes) {
        lane_path(out, discretize(lane.curve, 4.0), lane.type, style.lane_width);
        // Overlay the annotated gap stretches.
        for (const GapInterval& gap : lane.gaps) {
            std::vector<Point2> pts;
            const int steps = 24;
            for (int i = 0; i <= steps; ++i) {
                const double t = gap.t0 + (gap.t1 - gap.t0) * (static_cast<double>(i) / steps);
                pts.push_back(eval_bezier(lane.curve, t));
            }
            std::vector<Point2> dedup;
            for (const Point2& p : pts) {
                if (dedup.empty() || !(p == dedup.back())) dedup.push_back(p);
            }
            if (dedup.size() >= 2) {
                lane_path(out, Polyline(dedup), LaneType::OcclusionOrGap, style.lane_width);
            }
        }
    }
    out << "</svg>\n";
    return out.str();
}

std::string result_svg(std::span<const DecodedPoint> points, std::span<const StageStats> stages,
                       int image_width, int image_height, const SvgStyle& style) {
    std::ostringstream out;
    open_svg(out, 0, 0, image_width, image_height);
    for (const StageStats& stage : stages) {
        for (const Rect& r : stage.uncertain) {
            out << "<rect class=\"uncertain\" x=\"" << fmt(r.x0) << "\" y=\"" << fmt(r.y0)
                << "\" width=\"" << fmt(r.width()) << "\" height=\"" << fmt(r.height())
                << "\" fill=\"#ff1744\" fill-opacity=\"0.18\" stroke=\"#ff1744\""
                << " stroke-width=\"1\"/>\n";
        }
    }
    for (const DecodedPoint& p : points) {
        out << "<circle cx=\"" << fmt(p.point.x) << "\" cy=\"" << fmt(p.point.y) << "\" r=\""
            << fmt(style.point_radius) << "\" fill=\"" << lane_type_color(p.type) << "\"/>\n";
    }
    out << "</svg>\n";
    return out.str();
}

std::string map_svg(std::span<const DetectedLane> merged, const GroundTruthMap* gt,
                    const SvgStyle& style) {
    double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;
    bool first = true;
    const auto expand = [&](const Point2& p) {
        if (first) {
            x0 = x1 = p.x;
            y0 = y1 = p.y;
            first = false;
            return;
        }
        x0 = std::min(x0, p.x);
        x1 = std::max(x1, p.x);
        y0 = std::min(y0, p.y);
        y1 = std::max(y1, p.y);
    };
    std::vector<Polyline> merged_polys;
    for (const DetectedLane& lane : merged) {
        merged_polys.push_back(discretize(lane.curve, 0.5));
        for (const Point2& p : merged_polys.back().vertices()) expand(p);
    }
    if (gt) {
        for (const MapLane& lane : gt->lanes) {
            for (const Point2& p : lane.vertices) expand(p);
        }
    }
    const double margin = 2.0;
    std::ostringstream out;
    open_svg(out, x0 - margin, y0 - margin, (x1 - x0) + 2 * margin, (y1 - y0) + 2 * margin);
    const double stroke = std::max((x1 - x0), (y1 - y0)) / 300.0 + 0.05;
    if (gt) {
        for (const MapLane& lane : gt->lanes) {
            std::ostringstream path;
            out << "<path class=\"gt\" fill=\"none\" stroke=\"#607d8b\" stroke-width=\""
                << fmt(stroke * 1.5) << "\" stroke-opacity=\"0.7\" d=\"";
            for (std::size_t i = 0; i < lane.vertices.size(); ++i) {
                out << (i == 0 ? "M" : " L") << fmt(lane.vertices[i].x) << " "
                    << fmt(lane.vertices[i].y);
            }
            out << "\"/>\n";
        }
    }
    for (std::size_t i = 0; i < merged_polys.size(); ++i) {
        lane_path(out, merged_polys[i], merged[i].lane_type, stroke);
    }
    (void)style;
    out << "</svg>\n";
    return out.str();
}

}  // namespace lanemap
