#include "lanemap/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace lanemap {

namespace {

struct CellKey {
    std::int64_t x;
    std::int64_t y;
    bool operator==(const CellKey& o) const { return x == o.x && y == o.y; }
};

struct CellKeyHash {
    std::size_t operator()(const CellKey& k) const {
        std::uint64_t h = static_cast<std::uint64_t>(k.x) * 0x9e3779b97f4a7c15ULL;
        h ^= static_cast<std::uint64_t>(k.y) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        return static_cast<std::size_t>(h);
    }
};

// Uniform grid over (x, y). Any neighbor of point a lies within planar
// radius eps / a.z because the metric multiplies by max(a.z, b.z) >= a.z;
// the exact metric test is still applied to every candidate, so the index
// changes nothing about the result.
class NeighborGrid {
public:
    NeighborGrid(std::span<const ZoomedPoint> pts, const std::vector<std::size_t>& order,
                 double cell)
        : points_(pts), cell_(cell) {
        for (std::size_t pos = 0; pos < order.size(); ++pos) {
            const auto& p = points_[order[pos]];
            cells_[key_of(p.x, p.y)].push_back(pos);
        }
        order_ = &order;
    }

    // Returns sorted-order positions of all points within `eps` of `pos`
    // under the zoom-weighted metric (the point itself included).
    void query(std::size_t pos, double eps, std::vector<std::size_t>& out) const {
        out.clear();
        const auto& a = points_[(*order_)[pos]];
        const double radius = eps / a.z;
        const std::int64_t cx0 = cell_index(a.x - radius);
        const std::int64_t cx1 = cell_index(a.x + radius);
        const std::int64_t cy0 = cell_index(a.y - radius);
        const std::int64_t cy1 = cell_index(a.y + radius);
        for (std::int64_t cy = cy0; cy <= cy1; ++cy) {
            for (std::int64_t cx = cx0; cx <= cx1; ++cx) {
                auto it = cells_.find(CellKey{cx, cy});
                if (it == cells_.end()) continue;
                for (std::size_t cand : it->second) {
                    const auto& b = points_[(*order_)[cand]];
                    if (zoom_distance(a, b) <= eps) out.push_back(cand);
                }
            }
        }
        std::sort(out.begin(), out.end());
    }

private:
    std::int64_t cell_index(double v) const {
        return static_cast<std::int64_t>(std::floor(v / cell_));
    }
    CellKey key_of(double x, double y) const { return {cell_index(x), cell_index(y)}; }

    std::span<const ZoomedPoint> points_;
    const std::vector<std::size_t>* order_ = nullptr;
    double cell_;
    std::unordered_map<CellKey, std::vector<std::size_t>, CellKeyHash> cells_;
};

}  // namespace

std::vector<std::size_t> canonical_order(std::span<const ZoomedPoint> points) {
    std::vector<std::size_t> order(points.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& pa = points[a];
        const auto& pb = points[b];
        if (pa.y != pb.y) return pa.y < pb.y;
        if (pa.x != pb.x) return pa.x < pb.x;
        return pa.z < pb.z;
    });
    return order;
}

ClusterLabels dbscan(std::span<const ZoomedPoint> points, const ClusterParams& params) {
    if (!(params.eps > 0.0)) throw std::invalid_argument("dbscan: eps must be positive");
    if (params.min_pts < 1) throw std::invalid_argument("dbscan: min_pts must be >= 1");

    const std::size_t n = points.size();
    ClusterLabels result;
    result.labels.assign(n, kNoiseLabel);
    if (n == 0) return result;

    double z_min = std::numeric_limits<double>::infinity();
    for (const auto& p : points) {
        if (!(p.z > 0.0) || !std::isfinite(p.x) || !std::isfinite(p.y)) {
            throw std::invalid_argument("dbscan: points must be finite with z > 0");
        }
        z_min = std::min(z_min, p.z);
    }

    const auto order = canonical_order(points);
    const NeighborGrid grid(points, order, params.eps / z_min);

    constexpr int kUnvisited = -2;
    std::vector<int> label(n, kUnvisited);  // indexed by sorted position
    const auto min_pts = static_cast<std::size_t>(params.min_pts);

    int next_cluster = 0;
    std::vector<std::size_t> neighbors;
    std::vector<std::size_t> expansion;
    for (std::size_t i = 0; i < n; ++i) {
        if (label[i] != kUnvisited) continue;
        grid.query(i, params.eps, neighbors);
        if (neighbors.size() < min_pts) {
            label[i] = kNoiseLabel;
            continue;
        }
        const int cluster = next_cluster++;
        label[i] = cluster;
        std::deque<std::size_t> queue(neighbors.begin(), neighbors.end());
        while (!queue.empty()) {
            const std::size_t q = queue.front();
            queue.pop_front();
            if (label[q] == kNoiseLabel) label[q] = cluster;  // border point
            if (label[q] != kUnvisited) continue;
            label[q] = cluster;
            grid.query(q, params.eps, expansion);
            if (expansion.size() >= min_pts) {
                queue.insert(queue.end(), expansion.begin(), expansion.end());
            }
        }
    }

    for (std::size_t pos = 0; pos < n; ++pos) {
        result.labels[order[pos]] = label[pos];
    }
    result.cluster_count = next_cluster;
    return result;
}

}  // namespace lanemap
