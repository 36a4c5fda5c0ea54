#pragma once

#include <span>
#include <vector>

#include "lanemap/detector.hpp"
#include "lanemap/line_field.hpp"

// The crop-scheduling control loop: run the detector over a ladder of zoom
// ratios, keep the confident decoded points of every stage, and spend the
// next stage's crops on the regions the field was not confident about.
namespace lanemap {

struct ZoomSchedule {
    std::vector<double> ratios = {0.5, 1.0, 2.0, 4.0, 8.0, 16.0};
    double crop_size = 512.0;     // apparent pixels per crop side
    int max_crops_per_stage = 64;

    // Field of view of one crop at `ratio`, in full-image pixels.
    double fov(double ratio) const { return crop_size / ratio; }
};

// Throws std::invalid_argument unless ratios are positive and strictly increasing.
void validate_schedule(const ZoomSchedule& schedule);

struct PipelineOptions {
    double conf_threshold = 0.5;
    double mask_threshold = 0.5;
    bool injection_enabled = true;  // share the thumbnail crops as detector context
};

struct StageStats {
    double ratio = 0.0;
    int crop_count = 0;
    int decoded_points = 0;
    int failed_crops = 0;
    std::vector<Rect> uncertain;  // full-image pixels, all crops of the stage
};

struct PipelineResult {
    std::vector<DecodedPoint> points;  // sorted canonically by (y, x, z)
    std::vector<StageStats> stages;
};

// Zero-overlap tiling of the full image at the first schedule ratio.
std::vector<CropSpec> initial_crops(int image_width, int image_height,
                                    const ZoomSchedule& schedule);

// Minimal abutting crop cover of every rectangle at the next ratio,
// deduplicated and capped by descending region area.
std::vector<CropSpec> next_stage_crops(std::span<const Rect> regions, double ratio_next,
                                       const ZoomSchedule& schedule);

// Runs all stages until the schedule ends or no uncertain regions remain.
// A detector failure on one crop is recorded and skipped, never fatal.
// Decoded points outside the image bounds are discarded.
PipelineResult run_pipeline(const Detector& detector, int image_width, int image_height,
                            const ZoomSchedule& schedule, const PipelineOptions& options = {});

}  // namespace lanemap
