#include "lanemap/detector.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "lanemap/rng.hpp"

namespace lanemap {

void validate_scene(const Scene& scene) {
    if (scene.image_width <= 0 || scene.image_height <= 0) {
        throw std::invalid_argument("scene: image size must be positive");
    }
    const double w = scene.image_width;
    const double h = scene.image_height;
    for (const SceneLane& lane : scene.lanes) {
        if (lane.curve.control_points.size() < 2) {
            throw std::invalid_argument("scene: lane needs at least 2 control points");
        }
        for (const Point2& p : lane.curve.control_points) {
            if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
                throw std::invalid_argument("scene: non-finite control point");
            }
            if (p.x < -w || p.x > 2.0 * w || p.y < -h || p.y > 2.0 * h) {
                throw std::invalid_argument("scene: lane strays beyond 2x image margin");
            }
        }
        double prev_end = -1.0;
        auto gaps = lane.gaps;
        std::sort(gaps.begin(), gaps.end(),
                  [](const GapInterval& a, const GapInterval& b) { return a.t0 < b.t0; });
        for (const GapInterval& g : gaps) {
            if (!(g.t0 >= 0.0 && g.t1 <= 1.0 && g.t0 < g.t1)) {
                throw std::invalid_argument("scene: gap interval must lie within [0, 1]");
            }
            if (g.t0 < prev_end) {
                throw std::invalid_argument("scene: overlapping gap intervals");
            }
            prev_end = g.t1;
        }
    }
}

SyntheticDetector::SyntheticDetector(Scene scene, FieldConfig config, NoiseModel noise,
                                     FovRule fov_rule)
    : scene_(std::move(scene)), config_(config), noise_(noise), fov_rule_(fov_rule) {
    validate_scene(scene_);
    std::vector<Lane> lanes;
    std::vector<std::vector<GapInterval>> gaps;
    lanes.reserve(scene_.lanes.size());
    gaps.reserve(scene_.lanes.size());
    for (const SceneLane& sl : scene_.lanes) {
        lanes.push_back(Lane{sl.curve, sl.type});
        gaps.push_back(sl.gaps);
    }
    renderer_ = std::make_unique<FieldRenderer>(lanes, gaps, config_);
}

std::vector<bool> SyntheticDetector::bridged_gaps(const CropSpec& crop,
                                                  std::span<const CropSpec> context) const {
    const auto& infos = renderer_->gap_infos();
    std::vector<bool> bridged(infos.size(), false);
    if (fov_rule_ == FovRule::kNeverBridge) return bridged;
    const double own_fov = std::max(crop.width, crop.height);
    for (std::size_t g = 0; g < infos.size(); ++g) {
        if (own_fov > infos[g].arc_length) {
            bridged[g] = true;
            continue;
        }
        for (const CropSpec& ctx : context) {
            const Rect ctx_rect{ctx.origin.x, ctx.origin.y, ctx.origin.x + ctx.width,
                                ctx.origin.y + ctx.height};
            if (std::max(ctx.width, ctx.height) > infos[g].arc_length &&
                ctx_rect.intersects(infos[g].bbox)) {
                bridged[g] = true;
                break;
            }
        }
    }
    return bridged;
}

LineField SyntheticDetector::detect(const CropSpec& crop, std::span<const CropSpec> context) const {
    const Rect crop_rect{crop.origin.x, crop.origin.y, crop.origin.x + crop.width,
                         crop.origin.y + crop.height};
    const Rect image_rect{0.0, 0.0, static_cast<double>(scene_.image_width),
                          static_cast<double>(scene_.image_height)};
    if (!crop_rect.intersects(image_rect)) {
        // The request looks at nothing: report an empty field rather than fail.
        LineField field(crop, config_.stride);
        for (std::size_t r = 0; r < field.rows(); ++r) {
            for (std::size_t c = 0; c < field.cols(); ++c) {
                FieldCell& cell = field.at(r, c);
                cell.anchor = Point2{(static_cast<double>(c) + 0.5) * config_.stride,
                                     (static_cast<double>(r) + 0.5) * config_.stride};
                cell.mask = 0.0;
                cell.confidence = 1.0;
                cell.distance = config_.distance_cap();
                cell.type_scores.fill(0.0);
                cell.type_scores[static_cast<std::size_t>(LaneType::Other)] = 1.0;
            }
        }
        return field;
    }

    LineField field = renderer_->render(crop, bridged_gaps(crop, context));
    if (!noise_.is_zero()) apply_noise(field);
    return field;
}

void SyntheticDetector::apply_noise(LineField& field) const {
    const CropSpec& crop = field.crop();
    const double cap = config_.distance_cap();
    const std::uint64_t crop_hash =
        hash_mix(hash_mix(hash_mix(hash_mix(scene_.seed, hash_double(crop.origin.x)),
                                   hash_double(crop.origin.y)),
                          hash_double(crop.zoom_ratio)),
                 hash_double(crop.width));

    for (std::size_t r = 0; r < field.rows(); ++r) {
        for (std::size_t c = 0; c < field.cols(); ++c) {
            FieldCell& cell = field.at(r, c);
            RandomStream rng(hash_mix(hash_mix(crop_hash, r), c));
            // Fixed draw order keeps the stream stable across branches.
            const double nx = rng.normal(noise_.position_sigma);
            const double ny = rng.normal(noise_.position_sigma);
            const double dtheta = rng.normal(noise_.direction_sigma);
            const double u_mask = rng.uniform();
            const double u_conf = rng.uniform();
            const double u_type = rng.uniform();
            const auto type_pick = rng.next_u64();
            const double u_hall_r = rng.uniform();
            const double u_hall_a = rng.uniform();
            const auto hall_type = rng.next_u64();
            const double u_hall_dir = rng.uniform();

            if (cell.mask >= 0.5) {
                cell.position = cell.position + Point2{nx, ny};
                cell.distance = std::min(cell.position.norm(), cap);
                const double cs = std::cos(dtheta), sn = std::sin(dtheta);
                cell.direction = Point2{cell.direction.x * cs - cell.direction.y * sn,
                                        cell.direction.x * sn + cell.direction.y * cs};
                if (u_type < noise_.type_confusion_rate) {
                    const auto current = static_cast<std::uint64_t>(cell.argmax_type());
                    const auto other = (current + 1 + type_pick % (kLaneTypeCount - 1)) %
                                       kLaneTypeCount;
                    cell.type_scores.fill(0.0);
                    cell.type_scores[other] = 1.0;
                }
                if (u_mask < noise_.mask_flip_rate) {
                    cell.mask = 0.0;  // dropped detection
                }
            } else if (u_mask < noise_.mask_flip_rate) {
                // Hallucinated detection near the anchor.
                cell.mask = 1.0;
                const double radius = config_.mask_radius() * std::sqrt(u_hall_r);
                const double angle = 2.0 * 3.14159265358979323846 * u_hall_a;
                cell.position = Point2{radius * std::cos(angle), radius * std::sin(angle)};
                cell.distance = cell.position.norm();
                const double da = 2.0 * 3.14159265358979323846 * u_hall_dir;
                cell.direction = Point2{std::cos(da), std::sin(da)};
                cell.type_scores.fill(0.0);
                cell.type_scores[hall_type % kLaneTypeCount] = 1.0;
            }
            if (u_conf < noise_.confidence_flip_rate) {
                cell.confidence = 1.0 - cell.confidence;
            }
        }
    }
}

Scene make_random_scene(const RandomSceneParams& params) {
    if (params.min_lanes < 0 || params.max_lanes < params.min_lanes) {
        throw std::invalid_argument("make_random_scene: bad lane count bounds");
    }
    RandomStream rng(hash_mix(params.seed, 0x6c616e65));
    Scene scene;
    scene.image_width = params.width;
    scene.image_height = params.height;
    scene.seed = params.seed;

    const int span = params.max_lanes - params.min_lanes + 1;
    const int count = params.min_lanes + static_cast<int>(rng.uniform_index(span));
    const double w = params.width;
    const double h = params.height;

    static constexpr LaneType kTypes[] = {LaneType::WhiteSolid,   LaneType::WhiteDash,
                                          LaneType::YellowSolid,  LaneType::YellowDash,
                                          LaneType::RoadBoundary, LaneType::Other};

    for (int i = 0; i < count; ++i) {
        // Evenly partitioned base positions with jitter keep lanes apart.
        const double slot = (static_cast<double>(i) + 0.5) / count;
        const double base_x = w * (0.12 + 0.76 * slot) + rng.uniform(-0.03, 0.03) * w;
        SceneLane lane;
        std::vector<Point2> cps;
        cps.push_back({base_x + rng.uniform(-40.0, 40.0), -0.04 * h});
        cps.push_back({base_x + rng.uniform(-60.0, 60.0), 0.32 * h});
        cps.push_back({base_x + rng.uniform(-60.0, 60.0), 0.68 * h});
        cps.push_back({base_x + rng.uniform(-40.0, 40.0), 1.04 * h});
        lane.curve = BezierCurve(std::move(cps));
        lane.type = kTypes[rng.uniform_index(std::size(kTypes))];
        const bool dashed = lane.type == LaneType::WhiteDash || lane.type == LaneType::YellowDash;
        if (dashed && rng.bernoulli(params.gap_probability)) {
            const double t0 = rng.uniform(0.30, 0.55);
            const double len = rng.uniform(0.05, 0.12);
            lane.gaps.push_back(GapInterval{t0, t0 + len});
        }
        scene.lanes.push_back(std::move(lane));
    }
    validate_scene(scene);
    return scene;
}

}  // namespace lanemap
