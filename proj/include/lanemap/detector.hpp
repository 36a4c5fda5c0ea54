#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "lanemap/field_render.hpp"
#include "lanemap/line_field.hpp"

// The detector seam of the pipeline plus its analytic stand-in: a detector
// maps a crop request to a line field. The synthetic detector renders exact
// fields from planted lanes, then perturbs them with a deterministic noise
// stream derived from (scene seed, crop, cell), so results are independent
// of crop scheduling order.
namespace lanemap {

struct SceneLane {
    BezierCurve curve;  // full-image coordinates
    LaneType type = LaneType::WhiteSolid;
    std::vector<GapInterval> gaps;  // occluded / gap parameter intervals
};

struct Scene {
    int image_width = 2048;
    int image_height = 1536;
    std::vector<SceneLane> lanes;
    std::uint64_t seed = 0;
};

// Throws std::invalid_argument when lanes stray beyond a 2x margin of the
// image bounds or gap intervals are malformed.
void validate_scene(const Scene& scene);

struct NoiseModel {
    double position_sigma = 0.0;    // apparent pixels
    double direction_sigma = 0.0;   // radians
    double mask_flip_rate = 0.0;
    double confidence_flip_rate = 0.0;
    double type_confusion_rate = 0.0;

    bool is_zero() const {
        return position_sigma == 0.0 && direction_sigma == 0.0 && mask_flip_rate == 0.0 &&
               confidence_flip_rate == 0.0 && type_confusion_rate == 0.0;
    }
};

// Whether gap/occlusion stretches may be recognized as a continuation of
// the lane. With kBridgeByFov a gap is typed OcclusionOrGap when the crop's
// own field of view exceeds the gap length, or when a supplied context crop
// (the thumbnail stage) does; with kNeverBridge gaps always read as absent
// lane, which is the ablation of the global-context mechanism.
enum class FovRule {
    kBridgeByFov,
    kNeverBridge,
};

class Detector {
public:
    virtual ~Detector() = default;

    // The returned field echoes the requested crop and zoom ratio.
    virtual LineField detect(const CropSpec& crop,
                             std::span<const CropSpec> context = {}) const = 0;
};

class SyntheticDetector : public Detector {
public:
    SyntheticDetector(Scene scene, FieldConfig config, NoiseModel noise,
                      FovRule fov_rule = FovRule::kBridgeByFov);

    LineField detect(const CropSpec& crop, std::span<const CropSpec> context = {}) const override;

    const Scene& scene() const { return scene_; }
    const FieldRenderer& renderer() const { return *renderer_; }

private:
    std::vector<bool> bridged_gaps(const CropSpec& crop, std::span<const CropSpec> context) const;
    void apply_noise(LineField& field) const;

    Scene scene_;
    FieldConfig config_;
    NoiseModel noise_;
    FovRule fov_rule_;
    std::unique_ptr<FieldRenderer> renderer_;
};

struct RandomSceneParams {
    std::uint64_t seed = 1;
    int width = 2048;
    int height = 1536;
    int min_lanes = 2;
    int max_lanes = 5;
    double gap_probability = 0.3;  // chance a dashed lane carries a gap interval
};

// Draws a synthetic world of roughly vertical lanes with assorted types and
// optional gap intervals. Deterministic in the seed.
Scene make_random_scene(const RandomSceneParams& params);

}  // namespace lanemap
