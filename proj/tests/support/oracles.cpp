#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace lanemap::oracle {

namespace {

struct UnionFind {
    std::vector<std::size_t> parent;

    explicit UnionFind(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), std::size_t{0});
    }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

ClusterLabels dbscan_reference(std::span<const ZoomedPoint> points, const ClusterParams& params) {
    const std::size_t n = points.size();
    ClusterLabels out;
    out.labels.assign(n, kNoiseLabel);
    if (n == 0) return out;

    std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double planar = std::hypot(points[i].x - points[j].x, points[i].y - points[j].y);
            dist[i][j] = std::max(points[i].z, points[j].z) * planar;
        }
    }

    const auto min_pts = static_cast<std::size_t>(params.min_pts);
    std::vector<char> core(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t neighbors = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (dist[i][j] <= params.eps) ++neighbors;
        }
        core[i] = neighbors >= min_pts ? 1 : 0;
    }

    // Canonical position of every point: rank in (y, x, z) order.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (points[a].y != points[b].y) return points[a].y < points[b].y;
        if (points[a].x != points[b].x) return points[a].x < points[b].x;
        return points[a].z < points[b].z;
    });
    std::vector<std::size_t> rank(n);
    for (std::size_t pos = 0; pos < n; ++pos) rank[order[pos]] = pos;

    UnionFind uf(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!core[i]) continue;
        for (std::size_t j = i + 1; j < n; ++j) {
            if (core[j] && dist[i][j] <= params.eps) uf.unite(i, j);
        }
    }

    // Creation time of a component: the earliest canonical rank of its cores.
    std::vector<std::size_t> creation(n, std::numeric_limits<std::size_t>::max());
    for (std::size_t i = 0; i < n; ++i) {
        if (!core[i]) continue;
        const std::size_t root = uf.find(i);
        creation[root] = std::min(creation[root], rank[i]);
    }
    std::vector<std::size_t> roots;
    for (std::size_t i = 0; i < n; ++i) {
        if (core[i] && uf.find(i) == i) roots.push_back(i);
    }
    std::sort(roots.begin(), roots.end(),
              [&](std::size_t a, std::size_t b) { return creation[a] < creation[b]; });
    std::vector<int> cluster_of_root(n, -1);
    for (std::size_t k = 0; k < roots.size(); ++k) {
        cluster_of_root[roots[k]] = static_cast<int>(k);
    }

    for (std::size_t i = 0; i < n; ++i) {
        if (core[i]) {
            out.labels[i] = cluster_of_root[uf.find(i)];
            continue;
        }
        // Border point: earliest-created cluster among in-range cores.
        int best = -1;
        std::size_t best_creation = std::numeric_limits<std::size_t>::max();
        for (std::size_t j = 0; j < n; ++j) {
            if (!core[j] || dist[i][j] > params.eps) continue;
            const std::size_t root = uf.find(j);
            if (creation[root] < best_creation) {
                best_creation = creation[root];
                best = cluster_of_root[root];
            }
        }
        out.labels[i] = best >= 0 ? best : kNoiseLabel;
    }
    out.cluster_count = static_cast<int>(roots.size());
    return out;
}

std::vector<double> fit_cubic_reference(std::span<const ZoomedPoint> points, bool x_of_y,
                                        bool weight_by_zoom) {
    long double normal[4][4] = {};
    long double rhs[4] = {};
    for (const ZoomedPoint& p : points) {
        const long double s = x_of_y ? p.y : p.x;
        const long double v = x_of_y ? p.x : p.y;
        const long double w = weight_by_zoom ? p.z : 1.0L;
        long double powers[7];
        powers[0] = 1.0L;
        for (int k = 1; k < 7; ++k) powers[k] = powers[k - 1] * s;
        for (int i = 0; i < 4; ++i) {
            for (int j = 0; j < 4; ++j) normal[i][j] += w * powers[i + j];
            rhs[i] += w * v * powers[i];
        }
    }
    // Gaussian elimination with partial pivoting.
    int perm[4] = {0, 1, 2, 3};
    for (int col = 0; col < 4; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 4; ++r) {
            if (std::fabsl(normal[perm[r]][col]) > std::fabsl(normal[perm[pivot]][col])) pivot = r;
        }
        std::swap(perm[col], perm[pivot]);
        const long double diag = normal[perm[col]][col];
        if (diag == 0.0L) throw std::invalid_argument("fit_cubic_reference: singular system");
        for (int r = col + 1; r < 4; ++r) {
            const long double factor = normal[perm[r]][col] / diag;
            for (int c = col; c < 4; ++c) normal[perm[r]][c] -= factor * normal[perm[col]][c];
            rhs[perm[r]] -= factor * rhs[perm[col]];
        }
    }
    long double solution[4];
    for (int row = 3; row >= 0; --row) {
        long double acc = rhs[perm[row]];
        for (int c = row + 1; c < 4; ++c) acc -= normal[perm[row]][c] * solution[c];
        solution[row] = acc / normal[perm[row]][row];
    }
    return {static_cast<double>(solution[0]), static_cast<double>(solution[1]),
            static_cast<double>(solution[2]), static_cast<double>(solution[3])};
}

}  // namespace lanemap::oracle
