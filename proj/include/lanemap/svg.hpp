#pragma once

#include <span>
#include <string>

#include "lanemap/detector.hpp"
#include "lanemap/hdmap.hpp"
#include "lanemap/zoom.hpp"

// Deterministic SVG plots: scenes, pipeline results with uncertain-region
// overlays, and merged world maps. Lanes are color-coded by type with a
// fixed palette; uncertain regions render as translucent rectangles with
// class "uncertain".
namespace lanemap {

struct SvgStyle {
    double lane_width = 3.0;
    double point_radius = 2.0;
};

// Fixed palette, one distinct color per lane type.
const char* lane_type_color(LaneType type);

std::string scene_svg(const Scene& scene, const SvgStyle& style = {});

std::string result_svg(std::span<const DecodedPoint> points, std::span<const StageStats> stages,
                       int image_width, int image_height, const SvgStyle& style = {});

// `gt` may be null; merged lanes draw on top of it.
std::string map_svg(std::span<const DetectedLane> merged, const GroundTruthMap* gt,
                    const SvgStyle& style = {});

}  // namespace lanemap
