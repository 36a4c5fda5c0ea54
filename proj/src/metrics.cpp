#include "lanemap/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lanemap {

MatchResult MatchResult::from_counts(long long tp, long long fp, long long fn) {
    MatchResult r;
    r.tp = tp;
    r.fp = fp;
    r.fn = fn;
    r.precision = (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    r.recall = (tp + fn) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    r.f1 = (r.precision + r.recall) > 0.0
               ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
               : 0.0;
    return r;
}

namespace {

double segment_distance(const Point2& pt, const Point2& a, const Point2& b) {
    const Point2 d = b - a;
    const double len2 = d.squared_norm();
    if (len2 <= 0.0) return distance(pt, a);
    const double t = std::clamp((pt - a).dot(d) / len2, 0.0, 1.0);
    return distance(pt, a + d * t);
}

std::int64_t pixel_key(std::int64_t x, std::int64_t y) {
    return (y << 32) | (x & 0xffffffffLL);
}

void stamp_segment(const Point2& a, const Point2& b, double radius,
                   std::vector<std::int64_t>& out) {
    const auto x0 = static_cast<std::int64_t>(std::floor(std::min(a.x, b.x) - radius - 0.5));
    const auto x1 = static_cast<std::int64_t>(std::ceil(std::max(a.x, b.x) + radius + 0.5));
    const auto y0 = static_cast<std::int64_t>(std::floor(std::min(a.y, b.y) - radius - 0.5));
    const auto y1 = static_cast<std::int64_t>(std::ceil(std::max(a.y, b.y) + radius + 0.5));
    for (std::int64_t y = y0; y <= y1; ++y) {
        for (std::int64_t x = x0; x <= x1; ++x) {
            const Point2 center{static_cast<double>(x) + 0.5, static_cast<double>(y) + 0.5};
            if (segment_distance(center, a, b) < radius) out.push_back(pixel_key(x, y));
        }
    }
}

// Point on the polyline at arc position s (clamped to its length).
Point2 point_at_arc(const Polyline& pl, double s) {
    const auto& v = pl.vertices();
    if (s <= 0.0) return v.front();
    if (s >= pl.length()) return v.back();
    std::size_t lo = 0, hi = v.size() - 1;
    while (lo + 1 < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (pl.arc_at(mid) <= s) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const double seg_len = pl.arc_at(lo + 1) - pl.arc_at(lo);
    const double t = seg_len > 0.0 ? (s - pl.arc_at(lo)) / seg_len : 0.0;
    return v[lo] + (v[lo + 1] - v[lo]) * t;
}

long long intersection_count(const std::vector<std::int64_t>& a,
                             const std::vector<std::int64_t>& b) {
    long long count = 0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) {
            ++i;
        } else if (b[j] < a[i]) {
            ++j;
        } else {
            ++count;
            ++i;
            ++j;
        }
    }
    return count;
}

}  // namespace

std::vector<std::int64_t> rasterize_stroke(const Polyline& line, double width) {
    if (!(width > 0.0)) throw std::invalid_argument("rasterize_stroke: width must be positive");
    std::vector<std::int64_t> pixels;
    const auto& v = line.vertices();
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
        stamp_segment(v[i], v[i + 1], 0.5 * width, pixels);
    }
    std::sort(pixels.begin(), pixels.end());
    pixels.erase(std::unique(pixels.begin(), pixels.end()), pixels.end());
    return pixels;
}

MatchResult pixel_f1(std::span<const Polyline> gt, std::span<const Polyline> pred,
                     double thickness, int image_width, int image_height) {
    if (!(thickness > 0.0)) throw std::invalid_argument("pixel_f1: thickness must be positive");
    if (image_width <= 0 || image_height <= 0) {
        throw std::invalid_argument("pixel_f1: image size must be positive");
    }
    const auto w = static_cast<std::int64_t>(image_width);
    const auto h = static_cast<std::int64_t>(image_height);
    std::vector<std::uint8_t> grid(static_cast<std::size_t>(w * h), 0);
    const auto mark = [&](std::span<const Polyline> lines, std::uint8_t bit) {
        for (const Polyline& line : lines) {
            for (std::int64_t key : rasterize_stroke(line, thickness)) {
                const std::int64_t y = key >> 32;
                const std::int64_t x = static_cast<std::int32_t>(key & 0xffffffffLL);
                if (x < 0 || x >= w || y < 0 || y >= h) continue;
                grid[static_cast<std::size_t>(y * w + x)] |= bit;
            }
        }
    };
    mark(gt, 1);
    mark(pred, 2);
    long long tp = 0, fp = 0, fn = 0;
    for (std::uint8_t v : grid) {
        if (v == 3) ++tp;
        else if (v == 2) ++fp;
        else if (v == 1) ++fn;
    }
    return MatchResult::from_counts(tp, fp, fn);
}

MatchResult iou_f1(std::span<const Polyline> gt, std::span<const Polyline> pred, double width,
                   double iou_threshold) {
    if (!(width > 0.0)) throw std::invalid_argument("iou_f1: width must be positive");
    if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
        throw std::invalid_argument("iou_f1: threshold must lie in (0, 1]");
    }
    std::vector<std::vector<std::int64_t>> gt_masks, pred_masks;
    for (const Polyline& l : gt) gt_masks.push_back(rasterize_stroke(l, width));
    for (const Polyline& l : pred) pred_masks.push_back(rasterize_stroke(l, width));

    struct Pair {
        double iou;
        std::size_t g, p;
    };
    std::vector<Pair> pairs;
    for (std::size_t g = 0; g < gt_masks.size(); ++g) {
        for (std::size_t p = 0; p < pred_masks.size(); ++p) {
            const long long inter = intersection_count(gt_masks[g], pred_masks[p]);
            const auto uni = static_cast<long long>(gt_masks[g].size() + pred_masks[p].size()) -
                             inter;
            const double iou = uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni)
                                       : 0.0;
            if (iou >= iou_threshold) pairs.push_back(Pair{iou, g, p});
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        if (a.iou != b.iou) return a.iou > b.iou;
        if (a.g != b.g) return a.g < b.g;
        return a.p < b.p;
    });
    std::vector<char> gt_used(gt_masks.size(), 0), pred_used(pred_masks.size(), 0);
    long long tp = 0;
    for (const Pair& pair : pairs) {
        if (gt_used[pair.g] || pred_used[pair.p]) continue;
        gt_used[pair.g] = pred_used[pair.p] = 1;
        ++tp;
    }
    return MatchResult::from_counts(tp, static_cast<long long>(pred_masks.size()) - tp,
                                    static_cast<long long>(gt_masks.size()) - tp);
}

double area_between(const Polyline& gt, const Polyline& other, double sample_step) {
    if (!(sample_step > 0.0)) {
        throw std::invalid_argument("area_between: sample_step must be positive");
    }
    const double total = gt.length();
    std::vector<double> arcs;
    for (double s = 0.0; s < total; s += sample_step) arcs.push_back(s);
    arcs.push_back(total);

    double area = 0.0;
    double prev_d = point_to_polyline(point_at_arc(gt, arcs[0]), other).distance;
    for (std::size_t i = 1; i < arcs.size(); ++i) {
        const double d = point_to_polyline(point_at_arc(gt, arcs[i]), other).distance;
        area += 0.5 * (prev_d + d) * (arcs[i] - arcs[i - 1]);
        prev_d = d;
    }
    return area;
}

LineMatchReport match_lines(std::span<const Polyline> gt, std::span<const LaneType> gt_types,
                            std::span<const Polyline> pred,
                            std::span<const LaneType> pred_types,
                            const LineMatchParams& params) {
    if (!(params.dis_thresh > 0.0)) {
        throw std::invalid_argument("match_lines: dis_thresh must be positive");
    }
    if (params.require_type && (gt_types.size() != gt.size() || pred_types.size() != pred.size())) {
        throw std::invalid_argument("match_lines: type vectors required");
    }

    std::vector<LineMatchDetail> candidates;
    for (std::size_t g = 0; g < gt.size(); ++g) {
        for (std::size_t p = 0; p < pred.size(); ++p) {
            if (params.require_type && gt_types[g] != pred_types[p]) continue;
            const Point2 gs = gt[g].vertices().front();
            const Point2 ge = gt[g].vertices().back();
            const Point2 ps = pred[p].vertices().front();
            const Point2 pe = pred[p].vertices().back();
            const double forward = distance(gs, ps) + distance(ge, pe);
            const double flipped = distance(gs, pe) + distance(ge, ps);
            double ea, eb;
            if (forward <= flipped) {
                ea = distance(gs, ps);
                eb = distance(ge, pe);
            } else {
                ea = distance(gs, pe);
                eb = distance(ge, ps);
            }
            if (ea > params.dis_thresh || eb > params.dis_thresh) continue;
            const double area = area_between(gt[g], pred[p], params.sample_step);
            const double limit = params.area_thresh_factor * params.dis_thresh * gt[g].length();
            if (area > limit) continue;
            LineMatchDetail d;
            d.gt_index = static_cast<int>(g);
            d.pred_index = static_cast<int>(p);
            d.endpoint_a = ea;
            d.endpoint_b = eb;
            d.area = area;
            d.mean_offset = area / gt[g].length();
            candidates.push_back(d);
        }
    }
    std::sort(candidates.begin(), candidates.end(),
              [](const LineMatchDetail& a, const LineMatchDetail& b) {
                  if (a.area != b.area) return a.area < b.area;
                  if (a.gt_index != b.gt_index) return a.gt_index < b.gt_index;
                  return a.pred_index < b.pred_index;
              });

    LineMatchReport report;
    std::vector<char> gt_used(gt.size(), 0), pred_used(pred.size(), 0);
    for (const LineMatchDetail& c : candidates) {
        if (gt_used[static_cast<std::size_t>(c.gt_index)] ||
            pred_used[static_cast<std::size_t>(c.pred_index)]) {
            continue;
        }
        gt_used[static_cast<std::size_t>(c.gt_index)] = 1;
        pred_used[static_cast<std::size_t>(c.pred_index)] = 1;
        report.matches.push_back(c);
    }
    for (std::size_t g = 0; g < gt.size(); ++g) {
        if (!gt_used[g]) report.unmatched_gt.push_back(static_cast<int>(g));
    }
    for (std::size_t p = 0; p < pred.size(); ++p) {
        if (!pred_used[p]) report.unmatched_pred.push_back(static_cast<int>(p));
    }
    return report;
}

MatchResult line_match_f1(std::span<const Polyline> gt, std::span<const LaneType> gt_types,
                          std::span<const Polyline> pred, std::span<const LaneType> pred_types,
                          const LineMatchParams& params) {
    const LineMatchReport report = match_lines(gt, gt_types, pred, pred_types, params);
    return MatchResult::from_counts(static_cast<long long>(report.matches.size()),
                                    static_cast<long long>(report.unmatched_pred.size()),
                                    static_cast<long long>(report.unmatched_gt.size()));
}

std::vector<Polyline> to_polylines(std::span<const Lane> lanes, double step) {
    std::vector<Polyline> out;
    out.reserve(lanes.size());
    for (const Lane& lane : lanes) out.push_back(discretize(lane.curve, step));
    return out;
}

std::vector<Polyline> to_polylines(std::span<const DetectedLane> lanes, double step) {
    std::vector<Polyline> out;
    out.reserve(lanes.size());
    for (const DetectedLane& lane : lanes) out.push_back(discretize(lane.curve, step));
    return out;
}

std::vector<LaneType> lane_types(std::span<const Lane> lanes) {
    std::vector<LaneType> out;
    out.reserve(lanes.size());
    for (const Lane& lane : lanes) out.push_back(lane.type);
    return out;
}

std::vector<LaneType> lane_types(std::span<const DetectedLane> lanes) {
    std::vector<LaneType> out;
    out.reserve(lanes.size());
    for (const DetectedLane& lane : lanes) out.push_back(lane.lane_type);
    return out;
}

}  // namespace lanemap
