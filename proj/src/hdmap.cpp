#include "lanemap/hdmap.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lanemap/clustering.hpp"

namespace lanemap {

ShotPose make_camera_pose(const WorldPoint& position, double pitch, double yaw) {
    const double ct = std::cos(pitch), st = std::sin(pitch);
    const double cy = std::cos(yaw), sy = std::sin(yaw);
    Eigen::Vector3d x_c(cy, -sy, 0.0);              // camera right
    Eigen::Vector3d z_c(sy * ct, cy * ct, -st);     // camera forward, pitched down
    Eigen::Vector3d y_c = z_c.cross(x_c);           // camera down
    ShotPose pose;
    pose.position = position;
    pose.rotation.col(0) = x_c;
    pose.rotation.col(1) = y_c;
    pose.rotation.col(2) = z_c;
    return pose;
}

WorldPoint to_camera_frame(const ShotPose& pose, const WorldPoint& world) {
    const Eigen::Vector3d rel(world.x - pose.position.x, world.y - pose.position.y,
                              world.z - pose.position.z);
    const Eigen::Vector3d cam = pose.rotation.transpose() * rel;
    return WorldPoint{cam.x(), cam.y(), cam.z()};
}

GroundSurfaceParams fit_gsp(std::span<const WorldPoint> camera_frame_points) {
    const std::size_t n = camera_frame_points.size();
    if (n < 3) throw std::invalid_argument("fit_gsp: need at least 3 points");

    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (const WorldPoint& p : camera_frame_points) {
        mean += Eigen::Vector3d(p.x, p.y, p.z);
    }
    mean /= static_cast<double>(n);

    // Reject (3D-)collinear input: the plane family is then unconstrained.
    Eigen::MatrixXd centered(n, 3);
    for (std::size_t i = 0; i < n; ++i) {
        const WorldPoint& p = camera_frame_points[i];
        centered.row(static_cast<Eigen::Index>(i)) =
            Eigen::Vector3d(p.x - mean.x(), p.y - mean.y(), p.z - mean.z());
    }
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered);
    const auto& sv = svd.singularValues();
    if (sv(1) <= 1e-9 * std::max(sv(0), 1.0)) {
        throw std::invalid_argument("fit_gsp: degenerate (collinear) input");
    }

    // The no-roll plane cos(a) y + sin(a) z = h reduces to a total
    // least-squares line fit on the (y, z) projections: the optimal normal
    // is the smallest eigenvector of the 2x2 scatter matrix.
    Eigen::Matrix2d scatter = Eigen::Matrix2d::Zero();
    for (const WorldPoint& p : camera_frame_points) {
        const Eigen::Vector2d d(p.y - mean.y(), p.z - mean.z());
        scatter += d * d.transpose();
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(scatter);
    Eigen::Vector2d normal = eig.eigenvectors().col(0);  // smallest eigenvalue

    double h = normal.x() * mean.y() + normal.y() * mean.z();
    if (h < 0.0) {
        normal = -normal;
        h = -h;
    }
    if (normal.x() <= 0.0) {
        throw std::invalid_argument("fit_gsp: points do not form a ground plane below the camera");
    }
    GroundSurfaceParams params;
    params.angle = std::atan2(normal.y(), normal.x());
    params.height = h;
    if (!(params.height > 0.0) || !(std::abs(params.angle) < 1.5707963267948966)) {
        throw std::invalid_argument("fit_gsp: fitted plane outside the valid domain");
    }
    return params;
}

GroundSurfaceParams estimate_shot_gsp(const ShotPose& pose,
                                      std::span<const WorldPoint> ground_points_world,
                                      double radius) {
    std::vector<WorldPoint> local;
    for (const WorldPoint& p : ground_points_world) {
        const double dx = p.x - pose.position.x;
        const double dy = p.y - pose.position.y;
        const double dz = p.z - pose.position.z;
        if (dx * dx + dy * dy + dz * dz > radius * radius) continue;
        local.push_back(to_camera_frame(pose, p));
    }
    return fit_gsp(local);
}

namespace {

Eigen::Vector2d plane_normal(const GroundSurfaceParams& gsp) {
    return {std::cos(gsp.angle), std::sin(gsp.angle)};
}

}  // namespace

WorldPoint project_to_ground(const Point2& pixel, const Shot& shot) {
    if (!shot.gsp) throw std::domain_error("project_to_ground: shot has no ground surface");
    const CameraIntrinsics& k = shot.intrinsics;
    if (!(k.focal > 0.0)) throw std::invalid_argument("project_to_ground: bad focal length");
    const Eigen::Vector3d ray((pixel.x - k.principal_point.x) / k.focal,
                              (pixel.y - k.principal_point.y) / k.focal, 1.0);
    const Eigen::Vector2d n = plane_normal(*shot.gsp);
    const double denom = n.x() * ray.y() + n.y() * ray.z();
    if (denom <= 1e-12) {
        throw std::domain_error("project_to_ground: ray at or above the horizon");
    }
    const double t = shot.gsp->height / denom;
    const Eigen::Vector3d cam = t * ray;
    const Eigen::Vector3d world =
        shot.pose.rotation * cam +
        Eigen::Vector3d(shot.pose.position.x, shot.pose.position.y, shot.pose.position.z);
    return WorldPoint{world.x(), world.y(), world.z()};
}

Point2 forward_project(const WorldPoint& world, const Shot& shot) {
    const WorldPoint cam = to_camera_frame(shot.pose, world);
    if (cam.z <= 1e-12) {
        throw std::domain_error("forward_project: point at or behind the camera");
    }
    const CameraIntrinsics& k = shot.intrinsics;
    return Point2{k.focal * cam.x / cam.z + k.principal_point.x,
                  k.focal * cam.y / cam.z + k.principal_point.y};
}

double ground_sample_distance(const Point2& pixel, const Shot& shot) {
    const WorldPoint a = project_to_ground(Point2{pixel.x, pixel.y - 0.5}, shot);
    const WorldPoint b = project_to_ground(Point2{pixel.x, pixel.y + 0.5}, shot);
    return std::hypot(a.x - b.x, a.y - b.y);
}

MergeOutput merge_lanes(std::span<const Shot> shots, const MergeParams& params) {
    MergeOutput out;
    std::vector<LaneType> sample_types;
    for (const Shot& shot : shots) {
        if (!shot.gsp) {
            out.skipped_shots.push_back(shot.id);
            continue;
        }
        for (const DetectedLane& lane : shot.detections) {
            const double s0 = lane.curve.param_min;
            const double s1 = lane.curve.param_max;
            const int steps =
                std::max(1, static_cast<int>(std::ceil((s1 - s0) / params.sample_step_px)));
            for (int i = 0; i <= steps; ++i) {
                const double s = s0 + (s1 - s0) * (static_cast<double>(i) / steps);
                const Point2 pixel = eval_poly(lane.curve, s);
                WorldPoint ground;
                double gsd = 0.0;
                try {
                    ground = project_to_ground(pixel, shot);
                    gsd = ground_sample_distance(pixel, shot);
                } catch (const std::domain_error&) {
                    continue;  // at/above horizon
                }
                const double range = std::hypot(ground.x - shot.pose.position.x,
                                                ground.y - shot.pose.position.y);
                if (range < params.range_min || range > params.range_max) continue;
                const double weight = std::clamp(params.gsd_reference / gsd, params.weight_min,
                                                 params.weight_max);
                out.samples.push_back(ZoomedPoint{ground.x, ground.y, weight});
                sample_types.push_back(lane.lane_type);
            }
        }
    }

    // Keep sample order canonical so clustering and fitting are reproducible.
    const auto order = canonical_order(out.samples);
    std::vector<ZoomedPoint> sorted_samples(out.samples.size());
    std::vector<LaneType> sorted_types(out.samples.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        sorted_samples[i] = out.samples[order[i]];
        sorted_types[i] = sample_types[order[i]];
    }
    out.samples = std::move(sorted_samples);
    sample_types = std::move(sorted_types);

    const ClusterLabels labels = dbscan(out.samples, params.cluster);
    for (int cluster = 0; cluster < labels.cluster_count; ++cluster) {
        std::vector<ZoomedPoint> members;
        std::vector<LaneType> types;
        for (std::size_t i = 0; i < out.samples.size(); ++i) {
            if (labels.labels[i] != cluster) continue;
            members.push_back(out.samples[i]);
            types.push_back(sample_types[i]);
        }
        if (members.size() < 4) {
            out.dropped_clusters++;
            continue;
        }
        double min_x = members[0].x, max_x = members[0].x;
        double min_y = members[0].y, max_y = members[0].y;
        for (const ZoomedPoint& p : members) {
            min_x = std::min(min_x, p.x);
            max_x = std::max(max_x, p.x);
            min_y = std::min(min_y, p.y);
            max_y = std::max(max_y, p.y);
        }
        const PolyAxis axis =
            (max_y - min_y) >= (max_x - min_x) ? PolyAxis::XofY : PolyAxis::YofX;
        DetectedLane lane;
        try {
            lane.curve = fit_cubic(members, axis, params.weight_fit_by_resolution);
        } catch (const std::invalid_argument&) {
            out.dropped_clusters++;
            continue;
        }
        lane.lane_type = assign_type(types);
        lane.support = static_cast<int>(members.size());
        double wsum = 0.0, rsum = 0.0;
        for (const ZoomedPoint& p : members) {
            const double s = axis == PolyAxis::XofY ? p.y : p.x;
            const double v = axis == PolyAxis::XofY ? p.x : p.y;
            const double w = params.weight_fit_by_resolution ? p.z : 1.0;
            const double r = v - lane.curve.value(s);
            wsum += w;
            rsum += w * r * r;
        }
        lane.rms_residual = std::sqrt(rsum / wsum);
        out.lanes.push_back(lane);
    }
    return out;
}

MapErrorReport map_error(std::span<const DetectedLane> merged, const GroundTruthMap& gt,
                         const MapEvalParams& params) {
    if (gt.lanes.empty()) throw std::invalid_argument("map_error: empty ground-truth map");

    std::vector<Polyline> gt_polys;
    std::vector<LaneType> gt_types;
    for (const MapLane& lane : gt.lanes) {
        gt_polys.push_back(Polyline(lane.vertices));
        gt_types.push_back(lane.type);
    }
    std::vector<Polyline> pred_polys;
    std::vector<LaneType> pred_types;
    for (const DetectedLane& lane : merged) {
        pred_polys.push_back(discretize(lane.curve, params.discretize_step));
        pred_types.push_back(lane.lane_type);
    }

    LineMatchParams match_params;
    match_params.dis_thresh = params.dis_thresh;
    match_params.area_thresh_factor = params.area_thresh_factor;
    match_params.sample_step = params.sample_step;
    match_params.require_type = params.require_type;
    const LineMatchReport report =
        match_lines(gt_polys, gt_types, pred_polys, pred_types, match_params);

    MapErrorReport out;
    out.unmatched_gt = report.unmatched_gt;
    out.unmatched_pred = report.unmatched_pred;
    double total = 0.0;
    for (const LineMatchDetail& m : report.matches) {
        out.per_lane.push_back(LaneError{m.gt_index, m.pred_index, m.mean_offset});
        total += m.mean_offset;
    }
    if (!out.per_lane.empty()) {
        out.mean_error = total / static_cast<double>(out.per_lane.size());
    }
    return out;
}

GspError gsp_error(const GroundSurfaceParams& estimated, const GroundSurfaceParams& truth) {
    GspError e;
    e.height_error = std::abs(estimated.height - truth.height);
    e.angle_error = std::abs(estimated.angle - truth.angle) * 180.0 / 3.14159265358979323846;
    return e;
}

}  // namespace lanemap
