#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "lanemap/line_field.hpp"

// Lane geometry prepared once per scene and rendered into line fields crop
// by crop. Lanes are discretized to fine polylines with exact cut vertices
// at gap boundaries; a spatial hash over segments answers the
// nearest-two-distinct-lanes queries that drive every branch of a cell.
namespace lanemap {

struct GapInterval {
    double t0 = 0.0;
    double t1 = 0.0;  // curve-parameter interval, 0 <= t0 < t1 <= 1
};

class FieldRenderer {
public:
    // `gaps`, when non-empty, must have one entry per lane. Gap segments are
    // excluded from rendering unless their gap id is marked bridged, in
    // which case they render with type OcclusionOrGap.
    FieldRenderer(std::span<const Lane> lanes,
                  std::span<const std::vector<GapInterval>> gaps,
                  const FieldConfig& config);

    LineField render(const CropSpec& crop, const std::vector<bool>& bridged_gaps) const;
    LineField render(const CropSpec& crop) const { return render(crop, std::vector<bool>{}); }

    struct GapInfo {
        int lane = 0;
        double arc_length = 0.0;  // full-image pixels along the lane
        Rect bbox;
    };
    const std::vector<GapInfo>& gap_infos() const { return gap_infos_; }
    std::size_t lane_count() const { return lane_types_.size(); }

    // The canonical discretization of one input lane (full geometry, gaps
    // included); decoded ground-truth points lie exactly on it.
    const Polyline& lane_polyline(std::size_t lane) const { return lane_polylines_[lane]; }

    const FieldConfig& config() const { return config_; }

private:
    struct Segment {
        Point2 a;
        Point2 b;
        int lane = 0;
        int gap = -1;  // -1: always visible; otherwise index into gap_infos_
    };

    struct NearestInfo {
        double d1 = 0.0;  // full-image pixels
        Point2 cp1;
        Point2 tangent{0.0, 1.0};
        LaneType type = LaneType::Other;
        bool on_gap = false;
        bool found = false;
        double separation = 0.0;  // ||cp1 - cp2|| to the second-nearest lane
        bool has_second = false;
    };

    NearestInfo query_nearest(const Point2& anchor, double separation_limit,
                              const std::vector<bool>& bridged_gaps) const;
    void insert_segment(const Segment& seg);

    FieldConfig config_;
    std::vector<LaneType> lane_types_;
    std::vector<Polyline> lane_polylines_;
    std::vector<Segment> segments_;
    std::vector<GapInfo> gap_infos_;
    std::unordered_map<std::int64_t, std::vector<std::int32_t>> grid_;
    double cell_size_ = 64.0;
    std::int64_t cell_x0_ = 0, cell_x1_ = 0, cell_y0_ = 0, cell_y1_ = 0;
    bool has_segments_ = false;
};

}  // namespace lanemap
