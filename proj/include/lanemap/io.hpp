#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lanemap/detector.hpp"
#include "lanemap/fitting.hpp"
#include "lanemap/hdmap.hpp"
#include "lanemap/metrics.hpp"
#include "lanemap/zoom.hpp"

// File schemas for every artifact the tools exchange. All files carry a
// schema_version; readers reject newer majors and unknown keys. Numeric
// values round-trip bit-exactly through the JSON layer.
namespace lanemap {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

// Raised for malformed input files: bad JSON, unknown keys, wrong types,
// out-of-domain values, or a newer schema major.
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string lane_type_name(LaneType type);
LaneType lane_type_from_name(const std::string& name);

// --- scene ---------------------------------------------------------------
Json scene_to_json(const Scene& scene);
Scene scene_from_json(const Json& j);

// --- decoded points / pipeline result ------------------------------------
struct PointsFile {
    int image_width = 0;
    int image_height = 0;
    std::vector<DecodedPoint> points;
    std::vector<int> labels;  // empty, or one label per point (clustered file)
    int cluster_count = 0;
    std::vector<StageStats> stages;  // present on pipeline outputs
};

Json points_to_json(const PointsFile& file);
PointsFile points_from_json(const Json& j);

// --- lane sets -------------------------------------------------------------
// A lane record holds either a ground-truth Bezier or a fitted cubic.
struct LaneRecord {
    LaneType type = LaneType::WhiteSolid;
    std::optional<BezierCurve> bezier;
    std::optional<CubicPolynomialLine> cubic;
    std::optional<int> support;
    std::optional<double> rms_residual;
};

Json lanes_to_json(std::span<const LaneRecord> lanes);
std::vector<LaneRecord> lanes_from_json(const Json& j);
std::vector<LaneRecord> records_from_detected(std::span<const DetectedLane> lanes);
std::vector<LaneRecord> records_from_scene(const Scene& scene);

// Accepts either a scene file or a lanes file and returns the lane records.
std::vector<LaneRecord> load_lane_set(const std::filesystem::path& path);

Polyline record_to_polyline(const LaneRecord& record, double step);

// --- SfM ingest ------------------------------------------------------------
struct SfmIngest {
    std::vector<Shot> shots;
    std::vector<WorldPoint> ground_points;
    std::vector<WorldPoint> other_points;
};

Json ingest_to_json(const SfmIngest& ingest);
// `base_dir` resolves relative detections_file references.
SfmIngest ingest_from_json(const Json& j, const std::filesystem::path& base_dir = {});

// --- ground-truth map ------------------------------------------------------
Json map_to_json(const GroundTruthMap& map);
GroundTruthMap map_from_json(const Json& j);

// --- evaluation outputs ----------------------------------------------------
Json match_result_to_json(const MatchResult& result, const std::string& metric, const Json& params);
Json map_error_to_json(const MapErrorReport& report);

// --- pipeline configuration -------------------------------------------------
struct MetricConfig {
    double pixel_thickness = 40.0;
    double iou_width = 30.0;
    double iou_threshold = 0.5;
    double dis_thresh = 40.0;
    double area_thresh_factor = 1.0;
};

struct PipelineConfig {
    std::uint64_t seed = 0;
    FieldConfig field;
    ZoomSchedule zoom;
    PipelineOptions options;
    ClusterParams cluster{40.0, 3};
    FitParams fit;
    MetricConfig metrics;
    NoiseModel noise{1.0, 0.01, 0.01, 0.01, 0.01};
    MergeParams merge;
    MapEvalParams map_eval;
};

Json config_to_json(const PipelineConfig& config);
PipelineConfig config_from_json(const Json& j);
void validate_config(const PipelineConfig& config);

// --- run manifest ------------------------------------------------------------
struct ManifestEntry {
    std::string path;
    std::string hash;
};

struct RunManifest {
    std::string tool_version = kToolVersion;
    std::string config_hash;
    std::vector<ManifestEntry> inputs;
    std::vector<std::pair<std::string, double>> wall_clock_ms;  // per stage
};

Json manifest_to_json(const RunManifest& manifest);

// --- helpers ------------------------------------------------------------------
std::uint64_t fnv1a64(std::span<const char> bytes);
std::string hash_hex(std::span<const char> bytes);
std::string hash_file(const std::filesystem::path& path);
std::string hash_json(const Json& j);

Json load_json(const std::filesystem::path& path);
void save_json(const std::filesystem::path& path, const Json& j);
void save_text(const std::filesystem::path& path, const std::string& text);

}  // namespace lanemap
