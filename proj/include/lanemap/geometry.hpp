#pragma once

#include <cstddef>
#include <vector>

// Coordinate frames and curve primitives shared by the whole pipeline.
//
// Image frame: origin at the top-left corner, x grows rightward, y grows
// downward, units are pixels. World frame: right-handed, x/y in a local
// east-north plane, z up, units are meters.
namespace lanemap {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    Point2 operator+(const Point2& o) const { return {x + o.x, y + o.y}; }
    Point2 operator-(const Point2& o) const { return {x - o.x, y - o.y}; }
    Point2 operator*(double s) const { return {x * s, y * s}; }
    Point2 operator/(double s) const { return {x / s, y / s}; }
    bool operator==(const Point2& o) const { return x == o.x && y == o.y; }

    double dot(const Point2& o) const { return x * o.x + y * o.y; }
    double norm() const;
    double squared_norm() const { return x * x + y * y; }
};

using ImagePoint = Point2;

struct WorldPoint {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    bool operator==(const WorldPoint& o) const { return x == o.x && y == o.y && z == o.z; }
};

// The clustering tuple: an image (or plan-view) position plus the zoom
// ratio (or resolution weight) of the stage that produced it.
struct ZoomedPoint {
    double x = 0.0;
    double y = 0.0;
    double z = 1.0;
};

double distance(const Point2& a, const Point2& b);

struct BezierCurve {
    std::vector<Point2> control_points;  // >= 2 points, degree = count - 1

    BezierCurve() = default;
    explicit BezierCurve(std::vector<Point2> pts);
};

// Evaluates the curve at t in [0, 1] by de Casteljau subdivision; the
// endpoints reproduce the first/last control points exactly.
Point2 eval_bezier(const BezierCurve& curve, double t);

enum class PolyAxis {
    XofY,  // y is the free parameter, x = p(y); lanes are near-vertical in imagery
    YofX,  // x is the free parameter, y = p(x)
};

struct CubicPolynomialLine {
    double coeffs[4] = {0.0, 0.0, 0.0, 0.0};  // p0 + p1 s + p2 s^2 + p3 s^3
    PolyAxis axis = PolyAxis::XofY;
    double param_min = 0.0;
    double param_max = 0.0;  // must be > param_min

    double value(double s) const {
        return coeffs[0] + s * (coeffs[1] + s * (coeffs[2] + s * coeffs[3]));
    }
};

// Evaluates the line at parameter s within [param_min, param_max] and maps
// the pair through the axis convention.
Point2 eval_poly(const CubicPolynomialLine& line, double s);

class Polyline {
public:
    Polyline() = default;
    // Throws std::invalid_argument on fewer than 2 vertices, consecutive
    // duplicates, or zero total length.
    explicit Polyline(std::vector<Point2> vertices);

    const std::vector<Point2>& vertices() const { return vertices_; }
    std::size_t size() const { return vertices_.size(); }
    double length() const { return length_; }

    // Cumulative arc length up to vertex i.
    double arc_at(std::size_t i) const { return cumulative_[i]; }

private:
    std::vector<Point2> vertices_;
    std::vector<double> cumulative_;
    double length_ = 0.0;
};

struct ClosestPoint {
    double distance = 0.0;
    Point2 point;          // closest point on the polyline
    std::size_t segment = 0;  // index of the segment containing it
    double t = 0.0;        // position within that segment, in [0, 1]
};

// Exact closest point over all segments; ties resolved to the earliest segment.
ClosestPoint point_to_polyline(const Point2& pt, const Polyline& pl);

// Samples a curve so that consecutive vertices are at most `step` apart,
// always including both endpoints. Also reports the curve parameter of
// each vertex when `params` is non-null.
Polyline discretize(const BezierCurve& curve, double step, std::vector<double>* params = nullptr);
Polyline discretize(const CubicPolynomialLine& line, double step, std::vector<double>* params = nullptr);

}  // namespace lanemap
