#include "lanemap/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace lanemap {

double Point2::norm() const { return std::hypot(x, y); }

double distance(const Point2& a, const Point2& b) { return (a - b).norm(); }

BezierCurve::BezierCurve(std::vector<Point2> pts) : control_points(std::move(pts)) {
    if (control_points.size() < 2) {
        throw std::invalid_argument("BezierCurve requires at least 2 control points");
    }
}

Point2 eval_bezier(const BezierCurve& curve, double t) {
    if (!(t >= 0.0 && t <= 1.0)) {
        throw std::domain_error("eval_bezier: t outside [0, 1]");
    }
    if (curve.control_points.size() < 2) {
        throw std::invalid_argument("eval_bezier: curve has fewer than 2 control points");
    }
    std::vector<Point2> work = curve.control_points;
    for (std::size_t level = work.size() - 1; level > 0; --level) {
        for (std::size_t i = 0; i < level; ++i) {
            work[i] = work[i] * (1.0 - t) + work[i + 1] * t;
        }
    }
    return work[0];
}

Point2 eval_poly(const CubicPolynomialLine& line, double s) {
    if (!(line.param_max > line.param_min)) {
        throw std::invalid_argument("eval_poly: degenerate param_range");
    }
    if (!(s >= line.param_min && s <= line.param_max)) {
        throw std::domain_error("eval_poly: parameter outside param_range");
    }
    const double v = line.value(s);
    return line.axis == PolyAxis::XofY ? Point2{v, s} : Point2{s, v};
}

Polyline::Polyline(std::vector<Point2> vertices) : vertices_(std::move(vertices)) {
    if (vertices_.size() < 2) {
        throw std::invalid_argument("Polyline requires at least 2 vertices");
    }
    cumulative_.resize(vertices_.size());
    cumulative_[0] = 0.0;
    for (std::size_t i = 1; i < vertices_.size(); ++i) {
        if (vertices_[i] == vertices_[i - 1]) {
            throw std::invalid_argument("Polyline has consecutive identical vertices");
        }
        cumulative_[i] = cumulative_[i - 1] + distance(vertices_[i], vertices_[i - 1]);
    }
    length_ = cumulative_.back();
    if (!(length_ > 0.0)) {
        throw std::invalid_argument("Polyline has zero length");
    }
}

ClosestPoint point_to_polyline(const Point2& pt, const Polyline& pl) {
    const auto& v = pl.vertices();
    if (v.size() < 2) {
        throw std::invalid_argument("point_to_polyline: invalid polyline");
    }
    ClosestPoint best;
    best.distance = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
        const Point2 d = v[i + 1] - v[i];
        double t = 0.0;
        const double len2 = d.squared_norm();
        if (len2 > 0.0) {
            t = std::clamp((pt - v[i]).dot(d) / len2, 0.0, 1.0);
        }
        const Point2 candidate = v[i] + d * t;
        const double dist = distance(pt, candidate);
        if (dist < best.distance) {
            best = ClosestPoint{dist, candidate, i, t};
        }
    }
    return best;
}

namespace {

template <typename EvalFn>
Polyline discretize_impl(EvalFn&& eval, double s0, double s1, double step,
                         std::vector<double>* params) {
    if (!(step > 0.0)) {
        throw std::invalid_argument("discretize: step must be positive");
    }
    // Double the sample count until consecutive chords fit within `step`.
    // Chord lengths shrink monotonically under parameter refinement for the
    // smooth curves handled here.
    std::size_t n = 2;
    constexpr std::size_t kMaxSamples = std::size_t{1} << 22;
    std::vector<Point2> pts;
    std::vector<double> ts;
    while (true) {
        pts.clear();
        ts.clear();
        pts.reserve(n);
        ts.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double s = s0 + (s1 - s0) * (static_cast<double>(i) / static_cast<double>(n - 1));
            pts.push_back(eval(s));
            ts.push_back(s);
        }
        double max_gap = 0.0;
        for (std::size_t i = 1; i < pts.size(); ++i) {
            max_gap = std::max(max_gap, distance(pts[i], pts[i - 1]));
        }
        if (max_gap <= step || n >= kMaxSamples) break;
        n *= 2;
    }
    // Drop exact duplicates (degenerate spans of the curve).
    std::vector<Point2> out;
    std::vector<double> out_t;
    out.reserve(pts.size());
    out_t.reserve(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (out.empty() || !(pts[i] == out.back())) {
            out.push_back(pts[i]);
            out_t.push_back(ts[i]);
        }
    }
    if (params) *params = out_t;
    return Polyline(std::move(out));
}

}  // namespace

Polyline discretize(const BezierCurve& curve, double step, std::vector<double>* params) {
    return discretize_impl([&](double t) { return eval_bezier(curve, t); }, 0.0, 1.0, step, params);
}

Polyline discretize(const CubicPolynomialLine& line, double step, std::vector<double>* params) {
    if (!(line.param_max > line.param_min)) {
        throw std::invalid_argument("discretize: degenerate param_range");
    }
    return discretize_impl([&](double s) { return eval_poly(line, s); }, line.param_min,
                           line.param_max, step, params);
}

}  // namespace lanemap
