#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lanemap/fitting.hpp"
#include "lanemap/geometry.hpp"
#include "lanemap/metrics.hpp"

// The crowdsourced map back end: per-shot ground-surface estimation from an
// SfM point cloud, pinhole back-projection of image-space detections onto
// that surface, cross-shot lane merging in world coordinates, and scoring
// against a surveyed ground-truth map.
//
// Camera frame convention: x right, y down, z forward (optical axis).
// World frame: x/y in a local east-north plane, z up.
namespace lanemap {

struct CameraIntrinsics {
    double focal = 1000.0;     // pixels
    Point2 principal_point;    // pixels
    int image_width = 0;
    int image_height = 0;
};

struct ShotPose {
    WorldPoint position;         // camera center, world frame
    Eigen::Matrix3d rotation;    // camera-to-world, orthonormal, det +1
};

// Ground plane relative to the camera, restricted to the no-roll family:
// the plane normal lies in the camera's vertical (x = 0) plane. In camera
// coordinates the plane satisfies cos(angle) * y + sin(angle) * z = height.
struct GroundSurfaceParams {
    double angle = 0.0;   // radians, pitch between camera horizontal and ground
    double height = 1.5;  // meters, camera above ground
};

struct Shot {
    std::string id;
    ShotPose pose;
    CameraIntrinsics intrinsics;
    std::optional<GroundSurfaceParams> gsp;  // estimated; empty if the fit failed
    std::vector<DetectedLane> detections;    // image space
};

struct MapLane {
    LaneType type = LaneType::WhiteSolid;
    std::vector<Point2> vertices;  // plan-view meters
};

struct GroundTruthMap {
    std::vector<MapLane> lanes;
};

// Camera pose looking along +y at yaw 0, pitched down by `pitch` radians.
ShotPose make_camera_pose(const WorldPoint& position, double pitch, double yaw = 0.0);

// World -> camera frame.
WorldPoint to_camera_frame(const ShotPose& pose, const WorldPoint& world);

// Least-squares fit of the two-parameter ground plane to points given in
// the camera frame. Throws std::invalid_argument on fewer than 3 points or
// collinear input.
GroundSurfaceParams fit_gsp(std::span<const WorldPoint> camera_frame_points);

// Selects ground points within `radius` meters of the shot, moves them to
// the camera frame and fits the plane.
GroundSurfaceParams estimate_shot_gsp(const ShotPose& pose,
                                      std::span<const WorldPoint> ground_points_world,
                                      double radius = 25.0);

// Back-projects an image point through the intrinsics onto the shot's
// ground plane and returns the world-frame intersection. Throws
// std::domain_error when the ray does not hit the plane in front of the
// camera (at or above the horizon).
WorldPoint project_to_ground(const Point2& pixel, const Shot& shot);

// Pinhole projection of a world point into the image. Throws
// std::domain_error for points at or behind the camera plane.
Point2 forward_project(const WorldPoint& world, const Shot& shot);

// Meters per pixel of ground surface at the given image row, measured by
// projecting a half-pixel step in y.
double ground_sample_distance(const Point2& pixel, const Shot& shot);

struct MergeParams {
    double sample_step_px = 2.0;   // image-space sampling of each detection
    double range_min = 3.0;        // meters; closer samples are discarded
    double range_max = 30.0;       // meters; farther samples are discarded
    double gsd_reference = 0.1;    // m/px mapped to resolution weight 1
    double weight_min = 1.0;       // clamp of the per-sample resolution weight
    double weight_max = 16.0;
    ClusterParams cluster{1.2, 3}; // eps in zoom-weighted meters
    bool weight_fit_by_resolution = true;
};

struct MergeOutput {
    std::vector<DetectedLane> lanes;       // world-space cubics, meters
    std::vector<std::string> skipped_shots;  // shots without a usable surface
    int dropped_clusters = 0;
    std::vector<ZoomedPoint> samples;      // projected samples fed to clustering
};

// Projects every shot's detections onto its ground surface, clusters the
// union with the zoom-weighted metric (near-field samples carry a larger
// resolution weight, so precise points only merge over short gaps), and
// fits one typed world-space lane per cluster.
MergeOutput merge_lanes(std::span<const Shot> shots, const MergeParams& params = {});

struct MapEvalParams {
    double dis_thresh = 3.0;        // meters, endpoint limit
    double area_thresh_factor = 1.0;
    double sample_step = 0.25;      // meters, area integration step
    double discretize_step = 0.25;  // meters, lane discretization
    bool require_type = false;
};

struct LaneError {
    int gt_index = -1;
    int pred_index = -1;
    double lateral = 0.0;  // meters, enclosed area / gt length
};

struct MapErrorReport {
    std::optional<double> mean_error;  // empty when nothing matched
    std::vector<LaneError> per_lane;
    std::vector<int> unmatched_gt;
    std::vector<int> unmatched_pred;
};

// Matches merged lanes to the ground-truth map with the endpoint+area rules
// (thresholds in meters) and reports the mean lateral offset of matches.
MapErrorReport map_error(std::span<const DetectedLane> merged, const GroundTruthMap& gt,
                         const MapEvalParams& params = {});

struct GspError {
    double height_error = 0.0;  // meters
    double angle_error = 0.0;   // degrees
};

GspError gsp_error(const GroundSurfaceParams& estimated, const GroundSurfaceParams& truth);

}  // namespace lanemap
