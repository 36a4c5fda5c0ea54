#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lanemap/fitting.hpp"
#include "lanemap/geometry.hpp"
#include "lanemap/line_field.hpp"

// The three evaluation protocols: pixel-overlap F1 over rasterized strokes,
// per-line IoU matching, and the endpoint-plus-enclosed-area line match.
namespace lanemap {

struct MatchResult {
    long long tp = 0;
    long long fp = 0;
    long long fn = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;

    static MatchResult from_counts(long long tp, long long fp, long long fn);
};

struct LineMatchParams {
    double dis_thresh = 40.0;        // endpoint distance limit
    double area_thresh_factor = 1.0; // area limit = factor * dis_thresh * length(gt)
    bool require_type = false;       // a match additionally requires equal lane type
    double sample_step = 1.0;        // arc step for the area integral
};

// Rasterizes a stroke of the given full width around a polyline: the set of
// integer pixels whose centers lie strictly closer than width / 2. Keys are
// (y << 32) | (x & 0xffffffff), sorted ascending.
std::vector<std::int64_t> rasterize_stroke(const Polyline& line, double width);

// Overlap of the union of gt strokes against the union of pred strokes on
// the image grid; counts are pixels.
MatchResult pixel_f1(std::span<const Polyline> gt, std::span<const Polyline> pred,
                     double thickness, int image_width, int image_height);

// Greedy per-line bipartite matching by descending stroke IoU; a pair
// matches iff IoU >= iou_threshold.
MatchResult iou_f1(std::span<const Polyline> gt, std::span<const Polyline> pred, double width,
                   double iou_threshold);

// Area enclosed between two open curves: the gt line is sampled at
// `sample_step` arc increments, the lateral distance to the other line is
// measured at each sample, and the profile is integrated by trapezoid rule.
double area_between(const Polyline& gt, const Polyline& other, double sample_step = 1.0);

struct LineMatchDetail {
    int gt_index = -1;
    int pred_index = -1;
    double endpoint_a = 0.0;  // endpoint distances after orientation choice
    double endpoint_b = 0.0;
    double area = 0.0;
    double mean_offset = 0.0;  // area / length(gt)
};

struct LineMatchReport {
    std::vector<LineMatchDetail> matches;
    std::vector<int> unmatched_gt;
    std::vector<int> unmatched_pred;
};

// One-to-one greedy matching by ascending enclosed area. The prediction is
// oriented to minimize the summed endpoint distances before thresholding;
// both endpoint distances must individually pass dis_thresh. Type vectors
// may be empty when params.require_type is false.
LineMatchReport match_lines(std::span<const Polyline> gt, std::span<const LaneType> gt_types,
                            std::span<const Polyline> pred,
                            std::span<const LaneType> pred_types, const LineMatchParams& params);

MatchResult line_match_f1(std::span<const Polyline> gt, std::span<const LaneType> gt_types,
                          std::span<const Polyline> pred, std::span<const LaneType> pred_types,
                          const LineMatchParams& params);

// Discretizations used by the metric entry points.
std::vector<Polyline> to_polylines(std::span<const Lane> lanes, double step = 1.0);
std::vector<Polyline> to_polylines(std::span<const DetectedLane> lanes, double step = 1.0);
std::vector<LaneType> lane_types(std::span<const Lane> lanes);
std::vector<LaneType> lane_types(std::span<const DetectedLane> lanes);

}  // namespace lanemap
