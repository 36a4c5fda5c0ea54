#include "lanemap/fitting.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <stdexcept>

namespace lanemap {

CubicPolynomialLine fit_cubic(std::span<const ZoomedPoint> points, PolyAxis axis,
                              bool weight_by_zoom) {
    std::vector<double> s(points.size()), v(points.size()), w(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        s[i] = axis == PolyAxis::XofY ? p.y : p.x;
        v[i] = axis == PolyAxis::XofY ? p.x : p.y;
        w[i] = weight_by_zoom ? p.z : 1.0;
        if (!(w[i] > 0.0)) throw std::invalid_argument("fit_cubic: nonpositive weight");
    }
    std::set<double> distinct(s.begin(), s.end());
    if (distinct.size() < 4) {
        throw std::invalid_argument("fit_cubic: need at least 4 distinct parameter values");
    }

    const double smin = *distinct.begin();
    const double smax = *distinct.rbegin();
    const double center = 0.5 * (smin + smax);
    const double radius = 0.5 * (smax - smin);

    const auto n = static_cast<Eigen::Index>(points.size());
    Eigen::MatrixXd design(n, 4);
    Eigen::VectorXd rhs(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double u = (s[static_cast<std::size_t>(i)] - center) / radius;
        const double sw = std::sqrt(w[static_cast<std::size_t>(i)]);
        design(i, 0) = sw;
        design(i, 1) = sw * u;
        design(i, 2) = sw * u * u;
        design(i, 3) = sw * u * u * u;
        rhs(i) = sw * v[static_cast<std::size_t>(i)];
    }
    const Eigen::Vector4d q = design.colPivHouseholderQr().solve(rhs);

    // Map q(u) with u = alpha * s + beta back to raw coefficients.
    const double alpha = 1.0 / radius;
    const double beta = -center / radius;
    const double a2 = alpha * alpha, a3 = a2 * alpha;
    const double b2 = beta * beta, b3 = b2 * beta;
    CubicPolynomialLine line;
    line.coeffs[0] = q(0) + q(1) * beta + q(2) * b2 + q(3) * b3;
    line.coeffs[1] = q(1) * alpha + 2.0 * q(2) * alpha * beta + 3.0 * q(3) * alpha * b2;
    line.coeffs[2] = q(2) * a2 + 3.0 * q(3) * a2 * beta;
    line.coeffs[3] = q(3) * a3;
    line.axis = axis;
    line.param_min = smin;
    line.param_max = smax;
    return line;
}

LaneType assign_type(std::span<const LaneType> types) {
    if (types.empty()) throw std::invalid_argument("assign_type: empty cluster");
    std::array<int, kLaneTypeCount> votes{};
    for (LaneType t : types) votes[static_cast<std::size_t>(t)]++;

    const int gap_index = static_cast<int>(LaneType::OcclusionOrGap);
    bool only_gaps = true;
    for (int i = 0; i < kLaneTypeCount; ++i) {
        if (i != gap_index && votes[static_cast<std::size_t>(i)] > 0) only_gaps = false;
    }
    if (only_gaps) return LaneType::OcclusionOrGap;

    int best = -1;
    int best_votes = -1;
    for (int i = 0; i < kLaneTypeCount; ++i) {
        if (i == gap_index) continue;
        if (votes[static_cast<std::size_t>(i)] > best_votes) {
            best_votes = votes[static_cast<std::size_t>(i)];
            best = i;
        }
    }
    return static_cast<LaneType>(best);
}

LaneExtraction clusters_to_lanes(std::span<const DecodedPoint> points,
                                 const ClusterLabels& labels, const FitParams& params) {
    if (labels.labels.size() != points.size()) {
        throw std::invalid_argument("clusters_to_lanes: label/point size mismatch");
    }
    LaneExtraction out;
    for (int cluster = 0; cluster < labels.cluster_count; ++cluster) {
        std::vector<ZoomedPoint> member_points;
        std::vector<LaneType> member_types;
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (labels.labels[i] != cluster) continue;
            member_points.push_back(points[i].point);
            member_types.push_back(points[i].type);
        }
        if (member_points.size() < 4) {
            out.dropped_clusters++;
            continue;
        }
        DetectedLane lane;
        try {
            lane.curve = fit_cubic(member_points, params.axis, params.weight_by_zoom);
        } catch (const std::invalid_argument&) {
            out.dropped_clusters++;
            continue;
        }
        lane.lane_type = assign_type(member_types);
        lane.support = static_cast<int>(member_points.size());

        double wsum = 0.0, rsum = 0.0;
        for (const ZoomedPoint& p : member_points) {
            const double s = params.axis == PolyAxis::XofY ? p.y : p.x;
            const double v = params.axis == PolyAxis::XofY ? p.x : p.y;
            const double w = params.weight_by_zoom ? p.z : 1.0;
            const double r = v - lane.curve.value(s);
            wsum += w;
            rsum += w * r * r;
        }
        lane.rms_residual = std::sqrt(rsum / wsum);
        out.lanes.push_back(lane);
    }
    return out;
}

}  // namespace lanemap
