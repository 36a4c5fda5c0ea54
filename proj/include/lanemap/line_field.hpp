#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "lanemap/geometry.hpp"

// The per-anchor line prediction field: a dense grid of cells over one crop,
// each cell carrying six branch values (mask, type scores, position vector,
// direction, confidence, distance). Ground-truth rendering and point
// decoding follow the same conventions a detector would be trained against:
//
//   * a crop covers `width x height` full-image pixels and is presented to
//     the detector at `zoom_ratio`, so one crop-local ("apparent") pixel is
//     1 / zoom_ratio full-image pixels;
//   * all width/separation thresholds apply in apparent pixels, which is
//     what makes zooming in genuinely separate close lines;
//   * anchors sit at cell centers of a `stride`-apparent-pixel grid.
namespace lanemap {

enum class LaneType : int {
    WhiteSolid = 0,
    WhiteDash = 1,
    YellowSolid = 2,
    YellowDash = 3,
    RoadBoundary = 4,
    Other = 5,
    OcclusionOrGap = 6,
};

constexpr int kLaneTypeCount = 7;

struct Lane {
    BezierCurve curve;  // full-image coordinates
    LaneType type = LaneType::WhiteSolid;
};

struct CropSpec {
    Point2 origin;        // top-left corner, full-image pixels
    double width = 0.0;   // field of view, full-image pixels
    double height = 0.0;  // field of view, full-image pixels
    double zoom_ratio = 1.0;

    bool operator==(const CropSpec& o) const {
        return origin == o.origin && width == o.width && height == o.height &&
               zoom_ratio == o.zoom_ratio;
    }
};

struct FieldConfig {
    double stride = 8.0;                 // apparent pixels between anchors
    double stroke_width = 32.0;          // apparent-pixel width of a line stroke
    double confidence_separation = 46.0; // apparent-pixel limit below which two lines blur
    double distance_cap_factor = 2.0;    // distance branch saturates at factor * stroke_width
    double sample_step = 1.0;            // full-image pixels; lane discretization step

    double mask_radius() const { return 0.5 * stroke_width; }
    double distance_cap() const { return distance_cap_factor * stroke_width; }
};

struct FieldCell {
    Point2 anchor;      // crop-local, apparent pixels
    double mask = 0.0;  // in [0, 1]
    std::array<double, kLaneTypeCount> type_scores{};  // sums to 1
    Point2 position;    // apparent-pixel vector anchor -> closest line point
    Point2 direction{0.0, 1.0};  // unit local tangent, canonicalized to dy > 0
    double confidence = 1.0;     // binary in ground truth
    double distance = 0.0;       // apparent pixels, capped

    LaneType argmax_type() const;
};

class LineField {
public:
    LineField() = default;
    LineField(CropSpec crop, double stride);

    const CropSpec& crop() const { return crop_; }
    double stride() const { return stride_; }
    double zoom_ratio() const { return crop_.zoom_ratio; }
    std::size_t cols() const { return cols_; }
    std::size_t rows() const { return rows_; }

    FieldCell& at(std::size_t row, std::size_t col) { return cells_[row * cols_ + col]; }
    const FieldCell& at(std::size_t row, std::size_t col) const { return cells_[row * cols_ + col]; }
    std::span<const FieldCell> cells() const { return cells_; }
    std::span<FieldCell> cells() { return cells_; }

    // Converts a crop-local (apparent) point to full-image pixels.
    Point2 to_full_image(const Point2& crop_local) const {
        return crop_.origin + crop_local / crop_.zoom_ratio;
    }

private:
    CropSpec crop_;
    double stride_ = 8.0;
    std::size_t cols_ = 0;
    std::size_t rows_ = 0;
    std::vector<FieldCell> cells_;
};

// One confident sub-pixel detection: anchor + position vector resolved to
// full-image coordinates, tagged with the producing zoom ratio.
struct DecodedPoint {
    ZoomedPoint point;
    LaneType type = LaneType::WhiteSolid;
    Point2 direction{0.0, 1.0};
};

struct Rect {
    double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    double area() const { return width() * height(); }
    bool contains(const Point2& p) const {
        return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1;
    }
    bool intersects(const Rect& o) const {
        return x0 < o.x1 && o.x0 < x1 && y0 < o.y1 && o.y0 < y1;
    }
};

// Renders the exact ground-truth field for a set of lanes over one crop:
// mask from the apparent-pixel stroke radius, position/distance/direction
// from the closest lane point, one-hot type of the nearest lane, and binary
// confidence that drops to 0 wherever the two nearest distinct lanes are
// separated by less than the configured apparent-pixel limit.
LineField render_gt_field(std::span<const Lane> lanes, const CropSpec& crop,
                          const FieldConfig& config);

// Emits one point per cell with mask >= mask_threshold and
// confidence >= conf_threshold, at anchor + position in full-image pixels.
std::vector<DecodedPoint> decode_points(const LineField& field, double conf_threshold,
                                        double mask_threshold);

// Bounding rectangles (full-image pixels) of 4-connected components of
// cells that are masked but not confident.
std::vector<Rect> uncertain_regions(const LineField& field, double conf_threshold = 0.5,
                                    double mask_threshold = 0.5);

}  // namespace lanemap
