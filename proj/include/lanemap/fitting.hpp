#pragma once

#include <span>
#include <vector>

#include "lanemap/clustering.hpp"
#include "lanemap/geometry.hpp"
#include "lanemap/line_field.hpp"

// Turns point clusters into smooth typed lanes: a weighted least-squares
// cubic per cluster plus a plurality type vote.
namespace lanemap {

struct FitParams {
    PolyAxis axis = PolyAxis::XofY;
    bool weight_by_zoom = true;  // weight each point by its z; higher zoom is more precise
};

struct DetectedLane {
    CubicPolynomialLine curve;
    LaneType lane_type = LaneType::WhiteSolid;
    int support = 0;            // points in the cluster
    double rms_residual = 0.0;  // weighted RMS residual, pixels
};

// Weighted least-squares cubic over the points, parameterized along `axis`.
// Parameters are centered and scaled to [-1, 1] internally; the cubic
// Vandermonde on raw pixel coordinates is too ill-conditioned otherwise.
// Throws std::invalid_argument with fewer than 4 distinct parameter values.
CubicPolynomialLine fit_cubic(std::span<const ZoomedPoint> points, PolyAxis axis,
                              bool weight_by_zoom = true);

// Plurality vote over per-point types. OcclusionOrGap votes are excluded
// unless they are the only votes; ties break toward the smaller enum value.
LaneType assign_type(std::span<const LaneType> types);

struct LaneExtraction {
    std::vector<DetectedLane> lanes;
    int dropped_clusters = 0;  // clusters that failed the fit preconditions
};

// One DetectedLane per non-noise cluster with at least 4 usable points;
// underdetermined clusters are dropped and counted.
LaneExtraction clusters_to_lanes(std::span<const DecodedPoint> points,
                                 const ClusterLabels& labels, const FitParams& params = {});

}  // namespace lanemap
