#include "lanemap/field_render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lanemap {

namespace {

std::int64_t cell_key(std::int64_t cx, std::int64_t cy) {
    return (cx << 32) ^ (cy & 0xffffffffLL);
}

Point2 segment_closest(const Point2& pt, const Point2& a, const Point2& b) {
    const Point2 d = b - a;
    const double len2 = d.squared_norm();
    if (len2 <= 0.0) return a;
    const double t = std::clamp((pt - a).dot(d) / len2, 0.0, 1.0);
    return a + d * t;
}

Point2 canonical_tangent(const Point2& a, const Point2& b) {
    Point2 t = b - a;
    const double n = t.norm();
    if (n <= 0.0) return {0.0, 1.0};
    t = t / n;
    if (t.y < 0.0 || (t.y == 0.0 && t.x < 0.0)) t = t * -1.0;
    return t;
}

}  // namespace

FieldRenderer::FieldRenderer(std::span<const Lane> lanes,
                             std::span<const std::vector<GapInterval>> gaps,
                             const FieldConfig& config)
    : config_(config) {
    if (!gaps.empty() && gaps.size() != lanes.size()) {
        throw std::invalid_argument("FieldRenderer: gap list size must match lane count");
    }
    for (std::size_t li = 0; li < lanes.size(); ++li) {
        const Lane& lane = lanes[li];
        lane_types_.push_back(lane.type);

        std::vector<double> params;
        Polyline pl = discretize(lane.curve, config_.sample_step, &params);
        std::vector<Point2> verts(pl.vertices().begin(), pl.vertices().end());

        // Insert exact vertices at every gap boundary so that excluding gap
        // segments terminates the visible geometry precisely at the cut.
        std::vector<GapInterval> lane_gaps;
        if (!gaps.empty()) lane_gaps.assign(gaps[li].begin(), gaps[li].end());
        std::sort(lane_gaps.begin(), lane_gaps.end(),
                  [](const GapInterval& a, const GapInterval& b) { return a.t0 < b.t0; });
        for (const GapInterval& g : lane_gaps) {
            if (!(g.t0 >= 0.0 && g.t1 <= 1.0 && g.t0 < g.t1)) {
                throw std::invalid_argument("FieldRenderer: gap interval outside [0, 1]");
            }
            for (double boundary : {g.t0, g.t1}) {
                auto it = std::lower_bound(params.begin(), params.end(), boundary);
                if (it != params.end() && *it == boundary) continue;  // already a vertex
                if (it == params.begin() || it == params.end()) continue;
                const std::size_t idx = static_cast<std::size_t>(it - params.begin());
                const double t_prev = params[idx - 1];
                const double t_next = params[idx];
                const double frac = (boundary - t_prev) / (t_next - t_prev);
                const Point2 v = verts[idx - 1] + (verts[idx] - verts[idx - 1]) * frac;
                params.insert(params.begin() + static_cast<std::ptrdiff_t>(idx), boundary);
                verts.insert(verts.begin() + static_cast<std::ptrdiff_t>(idx), v);
            }
        }

        // Per-lane gap bookkeeping and segment tagging.
        std::vector<int> gap_ids(lane_gaps.size());
        for (std::size_t gi = 0; gi < lane_gaps.size(); ++gi) {
            gap_ids[gi] = static_cast<int>(gap_infos_.size());
            GapInfo info;
            info.lane = static_cast<int>(li);
            info.bbox = Rect{std::numeric_limits<double>::infinity(),
                             std::numeric_limits<double>::infinity(),
                             -std::numeric_limits<double>::infinity(),
                             -std::numeric_limits<double>::infinity()};
            gap_infos_.push_back(info);
        }

        for (std::size_t i = 0; i + 1 < verts.size(); ++i) {
            if (verts[i] == verts[i + 1]) continue;
            Segment seg;
            seg.a = verts[i];
            seg.b = verts[i + 1];
            seg.lane = static_cast<int>(li);
            const double t_mid = 0.5 * (params[i] + params[i + 1]);
            for (std::size_t gi = 0; gi < lane_gaps.size(); ++gi) {
                if (t_mid >= lane_gaps[gi].t0 && t_mid <= lane_gaps[gi].t1) {
                    seg.gap = gap_ids[gi];
                    GapInfo& info = gap_infos_[static_cast<std::size_t>(seg.gap)];
                    info.arc_length += distance(seg.a, seg.b);
                    info.bbox.x0 = std::min({info.bbox.x0, seg.a.x, seg.b.x});
                    info.bbox.y0 = std::min({info.bbox.y0, seg.a.y, seg.b.y});
                    info.bbox.x1 = std::max({info.bbox.x1, seg.a.x, seg.b.x});
                    info.bbox.y1 = std::max({info.bbox.y1, seg.a.y, seg.b.y});
                    break;
                }
            }
            insert_segment(seg);
            segments_.push_back(seg);
        }
        lane_polylines_.push_back(Polyline(std::move(verts)));
    }
}

void FieldRenderer::insert_segment(const Segment& seg) {
    const double x0 = std::min(seg.a.x, seg.b.x);
    const double x1 = std::max(seg.a.x, seg.b.x);
    const double y0 = std::min(seg.a.y, seg.b.y);
    const double y1 = std::max(seg.a.y, seg.b.y);
    const auto cx0 = static_cast<std::int64_t>(std::floor(x0 / cell_size_));
    const auto cx1 = static_cast<std::int64_t>(std::floor(x1 / cell_size_));
    const auto cy0 = static_cast<std::int64_t>(std::floor(y0 / cell_size_));
    const auto cy1 = static_cast<std::int64_t>(std::floor(y1 / cell_size_));
    const auto idx = static_cast<std::int32_t>(segments_.size());
    for (std::int64_t cy = cy0; cy <= cy1; ++cy) {
        for (std::int64_t cx = cx0; cx <= cx1; ++cx) {
            grid_[cell_key(cx, cy)].push_back(idx);
        }
    }
    if (!has_segments_) {
        cell_x0_ = cx0;
        cell_x1_ = cx1;
        cell_y0_ = cy0;
        cell_y1_ = cy1;
        has_segments_ = true;
    } else {
        cell_x0_ = std::min(cell_x0_, cx0);
        cell_x1_ = std::max(cell_x1_, cx1);
        cell_y0_ = std::min(cell_y0_, cy0);
        cell_y1_ = std::max(cell_y1_, cy1);
    }
}

FieldRenderer::NearestInfo FieldRenderer::query_nearest(
    const Point2& anchor, double separation_limit, const std::vector<bool>& bridged_gaps) const {
    NearestInfo out;
    if (!has_segments_) return out;

    struct LaneBest {
        double dist = std::numeric_limits<double>::infinity();
        Point2 cp;
        std::int32_t segment = -1;
    };
    std::vector<LaneBest> lane_best(lane_types_.size());

    const auto include = [&](const Segment& seg) {
        if (seg.gap < 0) return true;
        const auto gi = static_cast<std::size_t>(seg.gap);
        return gi < bridged_gaps.size() && bridged_gaps[gi];
    };

    const auto acx = static_cast<std::int64_t>(std::floor(anchor.x / cell_size_));
    const auto acy = static_cast<std::int64_t>(std::floor(anchor.y / cell_size_));
    const std::int64_t max_ring =
        std::max({std::llabs(acx - cell_x0_), std::llabs(cell_x1_ - acx),
                  std::llabs(acy - cell_y0_), std::llabs(cell_y1_ - acy)}) +
        1;

    std::vector<char> seen(segments_.size(), 0);
    double d1 = std::numeric_limits<double>::infinity();
    double d2 = std::numeric_limits<double>::infinity();
    int lane1 = -1;

    const auto refresh_best_two = [&]() {
        d1 = std::numeric_limits<double>::infinity();
        d2 = std::numeric_limits<double>::infinity();
        lane1 = -1;
        for (std::size_t li = 0; li < lane_best.size(); ++li) {
            const double d = lane_best[li].dist;
            if (d < d1) {
                d2 = d1;
                d1 = d;
                lane1 = static_cast<int>(li);
            } else if (d < d2) {
                d2 = d;
            }
        }
    };

    for (std::int64_t ring = 0; ring <= max_ring; ++ring) {
        // Once the ring's lower distance bound passes everything the output
        // can still depend on, stop. The second-nearest lane only matters
        // while it could fall within the separation limit of the nearest.
        const double ring_lb = ring > 0 ? static_cast<double>(ring - 1) * cell_size_ : 0.0;
        const double needed = std::min(d2, d1 + separation_limit);
        if (ring > 0 && ring_lb > needed && lane1 >= 0) break;

        for (std::int64_t cy = acy - ring; cy <= acy + ring; ++cy) {
            for (std::int64_t cx = acx - ring; cx <= acx + ring; ++cx) {
                if (ring > 0 && std::max(std::llabs(cx - acx), std::llabs(cy - acy)) != ring) {
                    continue;
                }
                auto it = grid_.find(cell_key(cx, cy));
                if (it == grid_.end()) continue;
                for (std::int32_t si : it->second) {
                    if (seen[static_cast<std::size_t>(si)]) continue;
                    seen[static_cast<std::size_t>(si)] = 1;
                    const Segment& seg = segments_[static_cast<std::size_t>(si)];
                    if (!include(seg)) continue;
                    const Point2 cp = segment_closest(anchor, seg.a, seg.b);
                    const double d = distance(anchor, cp);
                    LaneBest& best = lane_best[static_cast<std::size_t>(seg.lane)];
                    if (d < best.dist) {
                        best = LaneBest{d, cp, si};
                    }
                }
            }
        }
        refresh_best_two();
    }

    if (lane1 < 0) return out;
    const LaneBest& nearest = lane_best[static_cast<std::size_t>(lane1)];
    const Segment& seg = segments_[static_cast<std::size_t>(nearest.segment)];
    out.found = true;
    out.d1 = nearest.dist;
    out.cp1 = nearest.cp;
    out.tangent = canonical_tangent(seg.a, seg.b);
    out.type = seg.gap >= 0 ? LaneType::OcclusionOrGap : lane_types_[static_cast<std::size_t>(lane1)];
    out.on_gap = seg.gap >= 0;

    int lane2 = -1;
    double best2 = std::numeric_limits<double>::infinity();
    for (std::size_t li = 0; li < lane_best.size(); ++li) {
        if (static_cast<int>(li) == lane1) continue;
        if (lane_best[li].dist < best2) {
            best2 = lane_best[li].dist;
            lane2 = static_cast<int>(li);
        }
    }
    if (lane2 >= 0 && std::isfinite(best2)) {
        out.has_second = true;
        out.separation = distance(nearest.cp, lane_best[static_cast<std::size_t>(lane2)].cp);
    }
    return out;
}

LineField FieldRenderer::render(const CropSpec& crop, const std::vector<bool>& bridged_gaps) const {
    LineField field(crop, config_.stride);
    const double zoom = crop.zoom_ratio;
    const double mask_radius_full = config_.mask_radius() / zoom;
    const double separation_limit_full = config_.confidence_separation / zoom;
    const double cap = config_.distance_cap();

    for (std::size_t r = 0; r < field.rows(); ++r) {
        for (std::size_t c = 0; c < field.cols(); ++c) {
            FieldCell& cell = field.at(r, c);
            cell.anchor = Point2{(static_cast<double>(c) + 0.5) * config_.stride,
                                 (static_cast<double>(r) + 0.5) * config_.stride};
            const Point2 anchor_full = field.to_full_image(cell.anchor);
            const NearestInfo info = query_nearest(anchor_full, separation_limit_full, bridged_gaps);
            if (!info.found) {
                cell.mask = 0.0;
                cell.confidence = 1.0;
                cell.distance = cap;
                cell.position = Point2{0.0, 0.0};
                cell.direction = Point2{0.0, 1.0};
                cell.type_scores.fill(0.0);
                cell.type_scores[static_cast<std::size_t>(LaneType::Other)] = 1.0;
                continue;
            }
            cell.mask = info.d1 <= mask_radius_full ? 1.0 : 0.0;
            cell.distance = std::min(info.d1 * zoom, cap);
            Point2 position = (info.cp1 - anchor_full) * zoom;
            const double pn = position.norm();
            if (pn > cap) position = position * (cap / pn);
            cell.position = position;
            cell.direction = info.tangent;
            cell.type_scores.fill(0.0);
            cell.type_scores[static_cast<std::size_t>(info.type)] = 1.0;
            cell.confidence =
                (info.has_second && info.separation < separation_limit_full) ? 0.0 : 1.0;
        }
    }
    return field;
}

}  // namespace lanemap
