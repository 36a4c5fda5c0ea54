#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "lanemap/geometry.hpp"

// Density clustering of decoded line points. The metric weights the planar
// distance of a pair by the larger of the two zoom ratios, so points from
// fine (high-zoom) stages only connect over short planar gaps while coarse
// points connect loosely.
namespace lanemap {

inline double zoom_distance(const ZoomedPoint& a, const ZoomedPoint& b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    const double zmax = a.z > b.z ? a.z : b.z;
    return zmax * std::sqrt(dx * dx + dy * dy);
}

struct ClusterParams {
    double eps = 40.0;   // zoom-weighted distance units (pixels * ratio)
    int min_pts = 3;     // neighbor count threshold, inclusive of the point itself
};

constexpr int kNoiseLabel = -1;

struct ClusterLabels {
    std::vector<int> labels;  // per input point: cluster id >= 0, or kNoiseLabel
    int cluster_count = 0;
};

// DBSCAN with the zoom-weighted metric. Deterministic: points are processed
// in canonical (y, x, z) order, cluster ids are contiguous from 0 in order
// of discovery, and a border point reachable from several clusters joins the
// earliest-created one. Output labels are indexed by the input order.
ClusterLabels dbscan(std::span<const ZoomedPoint> points, const ClusterParams& params);

// Canonical processing order used by dbscan: ascending (y, x, z).
std::vector<std::size_t> canonical_order(std::span<const ZoomedPoint> points);

}  // namespace lanemap
