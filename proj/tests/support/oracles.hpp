#pragma once

#include <span>
#include <vector>

#include "lanemap/clustering.hpp"
#include "lanemap/geometry.hpp"

// Independent reference implementations used only to check the library.
// They deliberately take different routes from the production code: the
// clustering oracle classifies via a full distance matrix and union-find,
// the polynomial oracle solves raw-basis normal equations in long double.
namespace lanemap::oracle {

// Reference DBSCAN: core points from the full pairwise matrix, clusters as
// connected components of core points, ids ordered by the earliest core in
// canonical (y, x, z) order, border points claimed by the earliest-created
// cluster with a core neighbor in range.
ClusterLabels dbscan_reference(std::span<const ZoomedPoint> points, const ClusterParams& params);

// Raw-monomial weighted normal equations, long double Gaussian elimination.
// Returns {p0, p1, p2, p3}.
std::vector<double> fit_cubic_reference(std::span<const ZoomedPoint> points, bool x_of_y,
                                        bool weight_by_zoom);

}  // namespace lanemap::oracle
