#include "lanemap/zoom.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lanemap {

void validate_schedule(const ZoomSchedule& schedule) {
    if (schedule.ratios.empty()) throw std::invalid_argument("schedule: no ratios");
    if (!(schedule.crop_size > 0.0)) throw std::invalid_argument("schedule: crop_size <= 0");
    if (schedule.max_crops_per_stage < 1) {
        throw std::invalid_argument("schedule: max_crops_per_stage < 1");
    }
    double prev = 0.0;
    for (double r : schedule.ratios) {
        if (!(r > prev)) {
            throw std::invalid_argument("schedule: ratios must be positive and strictly increasing");
        }
        prev = r;
    }
}

std::vector<CropSpec> initial_crops(int image_width, int image_height,
                                    const ZoomSchedule& schedule) {
    validate_schedule(schedule);
    const double ratio = schedule.ratios.front();
    const double fov = schedule.fov(ratio);
    const int nx = std::max(1, static_cast<int>(std::ceil(image_width / fov)));
    const int ny = std::max(1, static_cast<int>(std::ceil(image_height / fov)));
    std::vector<CropSpec> crops;
    crops.reserve(static_cast<std::size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            crops.push_back(CropSpec{Point2{i * fov, j * fov}, fov, fov, ratio});
        }
    }
    return crops;
}

std::vector<CropSpec> next_stage_crops(std::span<const Rect> regions, double ratio_next,
                                       const ZoomSchedule& schedule) {
    validate_schedule(schedule);
    if (std::find(schedule.ratios.begin(), schedule.ratios.end(), ratio_next) ==
        schedule.ratios.end()) {
        throw std::invalid_argument("next_stage_crops: ratio not in schedule");
    }
    std::vector<Rect> ordered(regions.begin(), regions.end());
    std::sort(ordered.begin(), ordered.end(), [](const Rect& a, const Rect& b) {
        if (a.area() != b.area()) return a.area() > b.area();
        if (a.y0 != b.y0) return a.y0 < b.y0;
        return a.x0 < b.x0;
    });

    const double fov = schedule.fov(ratio_next);
    std::vector<CropSpec> crops;
    for (const Rect& region : ordered) {
        const int nx = std::max(1, static_cast<int>(std::ceil(region.width() / fov)));
        const int ny = std::max(1, static_cast<int>(std::ceil(region.height() / fov)));
        const double start_x = 0.5 * (region.x0 + region.x1) - 0.5 * nx * fov;
        const double start_y = 0.5 * (region.y0 + region.y1) - 0.5 * ny * fov;
        for (int j = 0; j < ny; ++j) {
            for (int i = 0; i < nx; ++i) {
                const CropSpec crop{Point2{start_x + i * fov, start_y + j * fov}, fov, fov,
                                    ratio_next};
                if (std::find(crops.begin(), crops.end(), crop) == crops.end()) {
                    crops.push_back(crop);
                }
                if (static_cast<int>(crops.size()) >= schedule.max_crops_per_stage) return crops;
            }
        }
    }
    return crops;
}

PipelineResult run_pipeline(const Detector& detector, int image_width, int image_height,
                            const ZoomSchedule& schedule, const PipelineOptions& options) {
    validate_schedule(schedule);
    PipelineResult result;
    std::vector<CropSpec> crops = initial_crops(image_width, image_height, schedule);
    std::vector<CropSpec> thumbnails = crops;

    for (std::size_t stage = 0; stage < schedule.ratios.size(); ++stage) {
        StageStats stats;
        stats.ratio = schedule.ratios[stage];
        stats.crop_count = static_cast<int>(crops.size());

        const std::span<const CropSpec> context =
            (stage > 0 && options.injection_enabled) ? std::span<const CropSpec>(thumbnails)
                                                     : std::span<const CropSpec>();
        for (const CropSpec& crop : crops) {
            LineField field;
            try {
                field = detector.detect(crop, context);
            } catch (const std::exception&) {
                stats.failed_crops++;
                continue;
            }
            for (DecodedPoint& p :
                 decode_points(field, options.conf_threshold, options.mask_threshold)) {
                if (p.point.x < 0.0 || p.point.x > image_width || p.point.y < 0.0 ||
                    p.point.y > image_height) {
                    continue;
                }
                result.points.push_back(p);
                stats.decoded_points++;
            }
            for (const Rect& r : uncertain_regions(field, options.conf_threshold,
                                                   options.mask_threshold)) {
                stats.uncertain.push_back(r);
            }
        }

        const bool last_stage = stage + 1 >= schedule.ratios.size();
        std::vector<CropSpec> next;
        if (!last_stage && !stats.uncertain.empty()) {
            next = next_stage_crops(stats.uncertain, schedule.ratios[stage + 1], schedule);
        }
        result.stages.push_back(std::move(stats));
        if (next.empty()) break;
        crops = std::move(next);
    }

    std::stable_sort(result.points.begin(), result.points.end(),
                     [](const DecodedPoint& a, const DecodedPoint& b) {
                         if (a.point.y != b.point.y) return a.point.y < b.point.y;
                         if (a.point.x != b.point.x) return a.point.x < b.point.x;
                         if (a.point.z != b.point.z) return a.point.z < b.point.z;
                         return static_cast<int>(a.type) < static_cast<int>(b.type);
                     });
    return result;
}

}  // namespace lanemap
