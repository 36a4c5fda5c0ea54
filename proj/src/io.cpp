#include "lanemap/io.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

namespace lanemap {

namespace {

void check_version(const Json& j, const char* where) {
    if (!j.is_object()) throw SchemaError(std::string(where) + ": expected a JSON object");
    if (!j.contains("schema_version") || !j["schema_version"].is_number_integer()) {
        throw SchemaError(std::string(where) + ": missing schema_version");
    }
    const int version = j["schema_version"].get<int>();
    if (version > kSchemaVersion) {
        throw SchemaError(std::string(where) + ": schema_version " + std::to_string(version) +
                          " is newer than supported " + std::to_string(kSchemaVersion));
    }
}

void require_keys(const Json& j, std::initializer_list<const char*> allowed, const char* where) {
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* key : allowed) {
            if (item.key() == key) {
                ok = true;
                break;
            }
        }
        if (!ok) {
            throw SchemaError(std::string(where) + ": unknown key '" + item.key() + "'");
        }
    }
}

const Json& field(const Json& j, const char* key, const char* where) {
    if (!j.contains(key)) {
        throw SchemaError(std::string(where) + ": missing key '" + key + "'");
    }
    return j[key];
}

double get_number(const Json& j, const char* key, const char* where) {
    const Json& v = field(j, key, where);
    if (!v.is_number()) throw SchemaError(std::string(where) + ": '" + key + "' must be a number");
    return v.get<double>();
}

int get_int(const Json& j, const char* key, const char* where) {
    const Json& v = field(j, key, where);
    if (!v.is_number_integer()) {
        throw SchemaError(std::string(where) + ": '" + key + "' must be an integer");
    }
    return v.get<int>();
}

bool get_bool(const Json& j, const char* key, const char* where) {
    const Json& v = field(j, key, where);
    if (!v.is_boolean()) throw SchemaError(std::string(where) + ": '" + key + "' must be a bool");
    return v.get<bool>();
}

std::string get_string(const Json& j, const char* key, const char* where) {
    const Json& v = field(j, key, where);
    if (!v.is_string()) throw SchemaError(std::string(where) + ": '" + key + "' must be a string");
    return v.get<std::string>();
}

Point2 point2_from_json(const Json& j, const char* where) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw SchemaError(std::string(where) + ": expected [x, y]");
    }
    return Point2{j[0].get<double>(), j[1].get<double>()};
}

Json point2_to_json(const Point2& p) { return Json::array({p.x, p.y}); }

WorldPoint world_from_json(const Json& j, const char* where) {
    if (!j.is_array() || j.size() != 3) {
        throw SchemaError(std::string(where) + ": expected [x, y, z]");
    }
    return WorldPoint{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Json world_to_json(const WorldPoint& p) { return Json::array({p.x, p.y, p.z}); }

std::string axis_name(PolyAxis axis) { return axis == PolyAxis::XofY ? "x_of_y" : "y_of_x"; }

PolyAxis axis_from_name(const std::string& name, const char* where) {
    if (name == "x_of_y") return PolyAxis::XofY;
    if (name == "y_of_x") return PolyAxis::YofX;
    throw SchemaError(std::string(where) + ": unknown axis '" + name + "'");
}

}  // namespace

std::string lane_type_name(LaneType type) {
    switch (type) {
        case LaneType::WhiteSolid: return "white_solid";
        case LaneType::WhiteDash: return "white_dash";
        case LaneType::YellowSolid: return "yellow_solid";
        case LaneType::YellowDash: return "yellow_dash";
        case LaneType::RoadBoundary: return "road_boundary";
        case LaneType::Other: return "other";
        case LaneType::OcclusionOrGap: return "occlusion_gap";
    }
    throw std::invalid_argument("lane_type_name: bad enum value");
}

LaneType lane_type_from_name(const std::string& name) {
    static const std::array<const char*, kLaneTypeCount> names = {
        "white_solid", "white_dash",  "yellow_solid",  "yellow_dash",
        "road_boundary", "other", "occlusion_gap"};
    for (int i = 0; i < kLaneTypeCount; ++i) {
        if (name == names[static_cast<std::size_t>(i)]) return static_cast<LaneType>(i);
    }
    throw SchemaError("unknown lane type '" + name + "'");
}

// --- scene -------------------------------------------------------------------

Json scene_to_json(const Scene& scene) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["image"] = Json{{"width", scene.image_width}, {"height", scene.image_height}};
    j["seed"] = scene.seed;
    Json lanes = Json::array();
    for (const SceneLane& lane : scene.lanes) {
        Json l;
        l["type"] = lane_type_name(lane.type);
        Json cps = Json::array();
        for (const Point2& p : lane.curve.control_points) cps.push_back(point2_to_json(p));
        l["control_points"] = cps;
        if (!lane.gaps.empty()) {
            Json gaps = Json::array();
            for (const GapInterval& g : lane.gaps) gaps.push_back(Json::array({g.t0, g.t1}));
            l["gaps"] = gaps;
        }
        lanes.push_back(l);
    }
    j["lanes"] = lanes;
    return j;
}

Scene scene_from_json(const Json& j) {
    check_version(j, "scene");
    require_keys(j, {"schema_version", "image", "seed", "lanes"}, "scene");
    Scene scene;
    const Json& image = field(j, "image", "scene");
    require_keys(image, {"width", "height"}, "scene.image");
    scene.image_width = get_int(image, "width", "scene.image");
    scene.image_height = get_int(image, "height", "scene.image");
    const Json& seed = field(j, "seed", "scene");
    if (!seed.is_number_integer() && !seed.is_number_unsigned()) {
        throw SchemaError("scene: 'seed' must be an integer");
    }
    scene.seed = seed.get<std::uint64_t>();
    for (const Json& l : field(j, "lanes", "scene")) {
        require_keys(l, {"type", "control_points", "gaps"}, "scene.lane");
        SceneLane lane;
        lane.type = lane_type_from_name(get_string(l, "type", "scene.lane"));
        std::vector<Point2> cps;
        for (const Json& p : field(l, "control_points", "scene.lane")) {
            cps.push_back(point2_from_json(p, "scene.lane.control_points"));
        }
        try {
            lane.curve = BezierCurve(std::move(cps));
        } catch (const std::invalid_argument& e) {
            throw SchemaError(std::string("scene.lane: ") + e.what());
        }
        if (l.contains("gaps")) {
            for (const Json& g : l["gaps"]) {
                if (!g.is_array() || g.size() != 2) {
                    throw SchemaError("scene.lane.gaps: expected [t0, t1]");
                }
                lane.gaps.push_back(GapInterval{g[0].get<double>(), g[1].get<double>()});
            }
        }
        scene.lanes.push_back(std::move(lane));
    }
    try {
        validate_scene(scene);
    } catch (const std::invalid_argument& e) {
        throw SchemaError(std::string("scene: ") + e.what());
    }
    return scene;
}

// --- points ---------------------------------------------------------------------

Json points_to_json(const PointsFile& file) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["image"] = Json{{"width", file.image_width}, {"height", file.image_height}};
    Json points = Json::array();
    const bool labeled = !file.labels.empty();
    for (std::size_t i = 0; i < file.points.size(); ++i) {
        const DecodedPoint& p = file.points[i];
        Json e;
        e["x"] = p.point.x;
        e["y"] = p.point.y;
        e["z"] = p.point.z;
        e["type"] = lane_type_name(p.type);
        e["direction"] = point2_to_json(p.direction);
        if (labeled) e["label"] = file.labels[i];
        points.push_back(e);
    }
    j["points"] = points;
    if (labeled) j["cluster_count"] = file.cluster_count;
    if (!file.stages.empty()) {
        Json stages = Json::array();
        for (const StageStats& s : file.stages) {
            Json e;
            e["ratio"] = s.ratio;
            e["crops"] = s.crop_count;
            e["points"] = s.decoded_points;
            e["failed_crops"] = s.failed_crops;
            Json rects = Json::array();
            for (const Rect& r : s.uncertain) {
                rects.push_back(Json{{"x0", r.x0}, {"y0", r.y0}, {"x1", r.x1}, {"y1", r.y1}});
            }
            e["uncertain"] = rects;
            stages.push_back(e);
        }
        j["stages"] = stages;
    }
    return j;
}

PointsFile points_from_json(const Json& j) {
    check_version(j, "points");
    require_keys(j, {"schema_version", "image", "points", "cluster_count", "stages"}, "points");
    PointsFile file;
    const Json& image = field(j, "image", "points");
    require_keys(image, {"width", "height"}, "points.image");
    file.image_width = get_int(image, "width", "points.image");
    file.image_height = get_int(image, "height", "points.image");
    bool any_label = false;
    for (const Json& e : field(j, "points", "points")) {
        require_keys(e, {"x", "y", "z", "type", "direction", "label"}, "points.point");
        DecodedPoint p;
        p.point.x = get_number(e, "x", "points.point");
        p.point.y = get_number(e, "y", "points.point");
        p.point.z = get_number(e, "z", "points.point");
        p.type = lane_type_from_name(get_string(e, "type", "points.point"));
        p.direction = point2_from_json(field(e, "direction", "points.point"), "points.point");
        file.points.push_back(p);
        if (e.contains("label")) {
            any_label = true;
            file.labels.push_back(get_int(e, "label", "points.point"));
        } else if (any_label) {
            throw SchemaError("points: labels must be present on all points or none");
        }
    }
    if (any_label && file.labels.size() != file.points.size()) {
        throw SchemaError("points: labels must be present on all points or none");
    }
    if (j.contains("cluster_count")) file.cluster_count = get_int(j, "cluster_count", "points");
    if (j.contains("stages")) {
        for (const Json& e : j["stages"]) {
            require_keys(e, {"ratio", "crops", "points", "failed_crops", "uncertain"},
                         "points.stage");
            StageStats s;
            s.ratio = get_number(e, "ratio", "points.stage");
            s.crop_count = get_int(e, "crops", "points.stage");
            s.decoded_points = get_int(e, "points", "points.stage");
            s.failed_crops = get_int(e, "failed_crops", "points.stage");
            for (const Json& r : field(e, "uncertain", "points.stage")) {
                require_keys(r, {"x0", "y0", "x1", "y1"}, "points.stage.uncertain");
                s.uncertain.push_back(Rect{get_number(r, "x0", "rect"), get_number(r, "y0", "rect"),
                                           get_number(r, "x1", "rect"),
                                           get_number(r, "y1", "rect")});
            }
            file.stages.push_back(std::move(s));
        }
    }
    return file;
}

// --- lane sets --------------------------------------------------------------------

Json lanes_to_json(std::span<const LaneRecord> lanes) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    Json arr = Json::array();
    for (const LaneRecord& r : lanes) {
        Json e;
        e["type"] = lane_type_name(r.type);
        Json curve;
        if (r.cubic) {
            curve["kind"] = "cubic";
            curve["coeffs"] = Json::array(
                {r.cubic->coeffs[0], r.cubic->coeffs[1], r.cubic->coeffs[2], r.cubic->coeffs[3]});
            curve["axis"] = axis_name(r.cubic->axis);
            curve["range"] = Json::array({r.cubic->param_min, r.cubic->param_max});
        } else if (r.bezier) {
            curve["kind"] = "bezier";
            Json cps = Json::array();
            for (const Point2& p : r.bezier->control_points) cps.push_back(point2_to_json(p));
            curve["control_points"] = cps;
        } else {
            throw std::invalid_argument("lanes_to_json: record has no curve");
        }
        e["curve"] = curve;
        if (r.support) e["support"] = *r.support;
        if (r.rms_residual) e["rms_residual"] = *r.rms_residual;
        arr.push_back(e);
    }
    j["lanes"] = arr;
    return j;
}

std::vector<LaneRecord> lanes_from_json(const Json& j) {
    check_version(j, "lanes");
    require_keys(j, {"schema_version", "lanes"}, "lanes");
    std::vector<LaneRecord> out;
    for (const Json& e : field(j, "lanes", "lanes")) {
        require_keys(e, {"type", "curve", "support", "rms_residual"}, "lanes.lane");
        LaneRecord r;
        r.type = lane_type_from_name(get_string(e, "type", "lanes.lane"));
        const Json& curve = field(e, "curve", "lanes.lane");
        const std::string kind = get_string(curve, "kind", "lanes.lane.curve");
        if (kind == "cubic") {
            require_keys(curve, {"kind", "coeffs", "axis", "range"}, "lanes.lane.curve");
            CubicPolynomialLine line;
            const Json& coeffs = field(curve, "coeffs", "lanes.lane.curve");
            if (!coeffs.is_array() || coeffs.size() != 4) {
                throw SchemaError("lanes.lane.curve: coeffs must have 4 entries");
            }
            for (int i = 0; i < 4; ++i) line.coeffs[i] = coeffs[static_cast<std::size_t>(i)].get<double>();
            line.axis = axis_from_name(get_string(curve, "axis", "lanes.lane.curve"),
                                       "lanes.lane.curve");
            const Json& range = field(curve, "range", "lanes.lane.curve");
            if (!range.is_array() || range.size() != 2) {
                throw SchemaError("lanes.lane.curve: range must be [min, max]");
            }
            line.param_min = range[0].get<double>();
            line.param_max = range[1].get<double>();
            if (!(line.param_max > line.param_min)) {
                throw SchemaError("lanes.lane.curve: degenerate range");
            }
            r.cubic = line;
        } else if (kind == "bezier") {
            require_keys(curve, {"kind", "control_points"}, "lanes.lane.curve");
            std::vector<Point2> cps;
            for (const Json& p : field(curve, "control_points", "lanes.lane.curve")) {
                cps.push_back(point2_from_json(p, "lanes.lane.curve.control_points"));
            }
            try {
                r.bezier = BezierCurve(std::move(cps));
            } catch (const std::invalid_argument& err) {
                throw SchemaError(std::string("lanes.lane.curve: ") + err.what());
            }
        } else {
            throw SchemaError("lanes.lane.curve: unknown kind '" + kind + "'");
        }
        if (e.contains("support")) r.support = get_int(e, "support", "lanes.lane");
        if (e.contains("rms_residual")) r.rms_residual = get_number(e, "rms_residual", "lanes.lane");
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<LaneRecord> records_from_detected(std::span<const DetectedLane> lanes) {
    std::vector<LaneRecord> out;
    for (const DetectedLane& lane : lanes) {
        LaneRecord r;
        r.type = lane.lane_type;
        r.cubic = lane.curve;
        r.support = lane.support;
        r.rms_residual = lane.rms_residual;
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<LaneRecord> records_from_scene(const Scene& scene) {
    std::vector<LaneRecord> out;
    for (const SceneLane& lane : scene.lanes) {
        LaneRecord r;
        r.type = lane.type;
        r.bezier = lane.curve;
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<LaneRecord> load_lane_set(const std::filesystem::path& path) {
    const Json j = load_json(path);
    if (j.is_object() && j.contains("lanes") && j["lanes"].is_array() && !j["lanes"].empty() &&
        j["lanes"][0].is_object() && j["lanes"][0].contains("control_points")) {
        return records_from_scene(scene_from_json(j));
    }
    if (j.is_object() && j.contains("image")) {
        return records_from_scene(scene_from_json(j));
    }
    return lanes_from_json(j);
}

Polyline record_to_polyline(const LaneRecord& record, double step) {
    if (record.cubic) return discretize(*record.cubic, step);
    if (record.bezier) return discretize(*record.bezier, step);
    throw std::invalid_argument("record_to_polyline: record has no curve");
}

// --- SfM ingest -------------------------------------------------------------------

Json ingest_to_json(const SfmIngest& ingest) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    Json shots = Json::array();
    for (const Shot& shot : ingest.shots) {
        Json s;
        s["id"] = shot.id;
        s["position"] = world_to_json(shot.pose.position);
        Json rot = Json::array();
        for (int r = 0; r < 3; ++r) {
            rot.push_back(Json::array({shot.pose.rotation(r, 0), shot.pose.rotation(r, 1),
                                       shot.pose.rotation(r, 2)}));
        }
        s["rotation"] = rot;
        s["intrinsics"] = Json{{"focal", shot.intrinsics.focal},
                               {"principal_point", point2_to_json(shot.intrinsics.principal_point)},
                               {"width", shot.intrinsics.image_width},
                               {"height", shot.intrinsics.image_height}};
        if (shot.gsp) {
            s["gsp"] = Json{{"angle", shot.gsp->angle}, {"height", shot.gsp->height}};
        }
        s["detections"] = lanes_to_json(records_from_detected(shot.detections))["lanes"];
        shots.push_back(s);
    }
    j["shots"] = shots;
    Json points = Json::array();
    for (const WorldPoint& p : ingest.ground_points) {
        points.push_back(Json{{"position", world_to_json(p)}, {"ground", true}});
    }
    for (const WorldPoint& p : ingest.other_points) {
        points.push_back(Json{{"position", world_to_json(p)}, {"ground", false}});
    }
    j["points"] = points;
    return j;
}

SfmIngest ingest_from_json(const Json& j, const std::filesystem::path& base_dir) {
    check_version(j, "ingest");
    require_keys(j, {"schema_version", "shots", "points"}, "ingest");
    SfmIngest ingest;
    for (const Json& s : field(j, "shots", "ingest")) {
        require_keys(s, {"id", "position", "rotation", "intrinsics", "gsp", "detections",
                         "detections_file"},
                     "ingest.shot");
        Shot shot;
        shot.id = get_string(s, "id", "ingest.shot");
        shot.pose.position = world_from_json(field(s, "position", "ingest.shot"), "ingest.shot");
        const Json& rot = field(s, "rotation", "ingest.shot");
        if (!rot.is_array() || rot.size() != 3) {
            throw SchemaError("ingest.shot: rotation must be a 3x3 matrix");
        }
        for (int r = 0; r < 3; ++r) {
            const Json& row = rot[static_cast<std::size_t>(r)];
            if (!row.is_array() || row.size() != 3) {
                throw SchemaError("ingest.shot: rotation must be a 3x3 matrix");
            }
            for (int c = 0; c < 3; ++c) {
                shot.pose.rotation(r, c) = row[static_cast<std::size_t>(c)].get<double>();
            }
        }
        // Accept mildly denormalized matrices (rounded text), re-project to
        // the nearest rotation, reject anything worse.
        Eigen::Matrix3d rt_r = shot.pose.rotation.transpose() * shot.pose.rotation;
        if ((rt_r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-6 ||
            shot.pose.rotation.determinant() < 0.0) {
            throw SchemaError("ingest.shot: rotation is not orthonormal with det +1");
        }
        const Eigen::JacobiSVD<Eigen::Matrix3d> svd(
            shot.pose.rotation, Eigen::ComputeFullU | Eigen::ComputeFullV);
        shot.pose.rotation = svd.matrixU() * svd.matrixV().transpose();

        const Json& intr = field(s, "intrinsics", "ingest.shot");
        require_keys(intr, {"focal", "principal_point", "width", "height"},
                     "ingest.shot.intrinsics");
        shot.intrinsics.focal = get_number(intr, "focal", "ingest.shot.intrinsics");
        if (!(shot.intrinsics.focal > 0.0)) {
            throw SchemaError("ingest.shot.intrinsics: focal must be positive");
        }
        shot.intrinsics.principal_point = point2_from_json(
            field(intr, "principal_point", "ingest.shot.intrinsics"), "ingest.shot.intrinsics");
        shot.intrinsics.image_width = get_int(intr, "width", "ingest.shot.intrinsics");
        shot.intrinsics.image_height = get_int(intr, "height", "ingest.shot.intrinsics");
        if (s.contains("gsp")) {
            require_keys(s["gsp"], {"angle", "height"}, "ingest.shot.gsp");
            GroundSurfaceParams gsp;
            gsp.angle = get_number(s["gsp"], "angle", "ingest.shot.gsp");
            gsp.height = get_number(s["gsp"], "height", "ingest.shot.gsp");
            shot.gsp = gsp;
        }
        Json detections = Json::array();
        if (s.contains("detections_file")) {
            const std::string ref = get_string(s, "detections_file", "ingest.shot");
            const Json lanes_json = load_json(base_dir / ref);
            for (const LaneRecord& r : lanes_from_json(lanes_json)) {
                if (!r.cubic) throw SchemaError("ingest.shot: detections must be cubic lanes");
                DetectedLane lane;
                lane.curve = *r.cubic;
                lane.lane_type = r.type;
                lane.support = r.support.value_or(0);
                lane.rms_residual = r.rms_residual.value_or(0.0);
                shot.detections.push_back(lane);
            }
        } else if (s.contains("detections")) {
            Json wrapper;
            wrapper["schema_version"] = kSchemaVersion;
            wrapper["lanes"] = s["detections"];
            for (const LaneRecord& r : lanes_from_json(wrapper)) {
                if (!r.cubic) throw SchemaError("ingest.shot: detections must be cubic lanes");
                DetectedLane lane;
                lane.curve = *r.cubic;
                lane.lane_type = r.type;
                lane.support = r.support.value_or(0);
                lane.rms_residual = r.rms_residual.value_or(0.0);
                shot.detections.push_back(lane);
            }
        }
        ingest.shots.push_back(std::move(shot));
    }
    for (const Json& p : field(j, "points", "ingest")) {
        require_keys(p, {"position", "ground"}, "ingest.point");
        const WorldPoint wp = world_from_json(field(p, "position", "ingest.point"), "ingest.point");
        if (get_bool(p, "ground", "ingest.point")) {
            ingest.ground_points.push_back(wp);
        } else {
            ingest.other_points.push_back(wp);
        }
    }
    return ingest;
}

// --- ground-truth map ----------------------------------------------------------

Json map_to_json(const GroundTruthMap& map) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    Json lanes = Json::array();
    for (const MapLane& lane : map.lanes) {
        Json e;
        e["type"] = lane_type_name(lane.type);
        Json verts = Json::array();
        for (const Point2& p : lane.vertices) verts.push_back(point2_to_json(p));
        e["vertices"] = verts;
        lanes.push_back(e);
    }
    j["lanes"] = lanes;
    return j;
}

GroundTruthMap map_from_json(const Json& j) {
    check_version(j, "map");
    require_keys(j, {"schema_version", "lanes"}, "map");
    GroundTruthMap map;
    for (const Json& e : field(j, "lanes", "map")) {
        require_keys(e, {"type", "vertices"}, "map.lane");
        MapLane lane;
        lane.type = lane_type_from_name(get_string(e, "type", "map.lane"));
        for (const Json& p : field(e, "vertices", "map.lane")) {
            lane.vertices.push_back(point2_from_json(p, "map.lane.vertices"));
        }
        if (lane.vertices.size() < 2) throw SchemaError("map.lane: needs at least 2 vertices");
        map.lanes.push_back(std::move(lane));
    }
    return map;
}

// --- evaluation outputs -----------------------------------------------------------

Json match_result_to_json(const MatchResult& result, const std::string& metric,
                          const Json& params) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["metric"] = metric;
    j["tp"] = result.tp;
    j["fp"] = result.fp;
    j["fn"] = result.fn;
    j["precision"] = result.precision;
    j["recall"] = result.recall;
    j["f1"] = result.f1;
    j["params"] = params;
    return j;
}

Json map_error_to_json(const MapErrorReport& report) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    if (report.mean_error) {
        j["mean_error"] = *report.mean_error;
    } else {
        j["mean_error"] = nullptr;
    }
    Json matches = Json::array();
    for (const LaneError& e : report.per_lane) {
        matches.push_back(Json{{"gt", e.gt_index}, {"pred", e.pred_index}, {"lateral", e.lateral}});
    }
    j["matches"] = matches;
    j["unmatched_gt"] = report.unmatched_gt;
    j["unmatched_pred"] = report.unmatched_pred;
    return j;
}

// --- pipeline configuration ----------------------------------------------------------

Json config_to_json(const PipelineConfig& config) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["seed"] = config.seed;
    j["field"] = Json{{"stride", config.field.stride},
                      {"stroke_width", config.field.stroke_width},
                      {"confidence_separation", config.field.confidence_separation},
                      {"distance_cap_factor", config.field.distance_cap_factor},
                      {"sample_step", config.field.sample_step}};
    j["zoom"] = Json{{"ratios", config.zoom.ratios},
                     {"crop_size", config.zoom.crop_size},
                     {"max_crops_per_stage", config.zoom.max_crops_per_stage}};
    j["thresholds"] = Json{{"mask", config.options.mask_threshold},
                           {"confidence", config.options.conf_threshold}};
    j["injection_enabled"] = config.options.injection_enabled;
    j["cluster"] = Json{{"eps", config.cluster.eps}, {"min_pts", config.cluster.min_pts}};
    j["fit"] = Json{{"axis", axis_name(config.fit.axis)},
                    {"weight_by_zoom", config.fit.weight_by_zoom}};
    j["metrics"] = Json{{"pixel_thickness", config.metrics.pixel_thickness},
                        {"iou_width", config.metrics.iou_width},
                        {"iou_threshold", config.metrics.iou_threshold},
                        {"dis_thresh", config.metrics.dis_thresh},
                        {"area_thresh_factor", config.metrics.area_thresh_factor}};
    j["noise"] = Json{{"position_sigma", config.noise.position_sigma},
                      {"direction_sigma", config.noise.direction_sigma},
                      {"mask_flip_rate", config.noise.mask_flip_rate},
                      {"confidence_flip_rate", config.noise.confidence_flip_rate},
                      {"type_confusion_rate", config.noise.type_confusion_rate}};
    j["merge"] = Json{{"sample_step_px", config.merge.sample_step_px},
                      {"range_min", config.merge.range_min},
                      {"range_max", config.merge.range_max},
                      {"gsd_reference", config.merge.gsd_reference},
                      {"weight_min", config.merge.weight_min},
                      {"weight_max", config.merge.weight_max},
                      {"eps", config.merge.cluster.eps},
                      {"min_pts", config.merge.cluster.min_pts}};
    j["map_eval"] = Json{{"dis_thresh", config.map_eval.dis_thresh},
                         {"area_thresh_factor", config.map_eval.area_thresh_factor},
                         {"sample_step", config.map_eval.sample_step},
                         {"discretize_step", config.map_eval.discretize_step}};
    return j;
}

PipelineConfig config_from_json(const Json& j) {
    check_version(j, "config");
    require_keys(j,
                 {"schema_version", "seed", "field", "zoom", "thresholds", "injection_enabled",
                  "cluster", "fit", "metrics", "noise", "merge", "map_eval"},
                 "config");
    PipelineConfig config;
    if (j.contains("seed")) {
        if (!j["seed"].is_number_integer() && !j["seed"].is_number_unsigned()) {
            throw SchemaError("config: 'seed' must be an integer");
        }
        config.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("field")) {
        const Json& f = j["field"];
        require_keys(f,
                     {"stride", "stroke_width", "confidence_separation", "distance_cap_factor",
                      "sample_step"},
                     "config.field");
        if (f.contains("stride")) config.field.stride = get_number(f, "stride", "config.field");
        if (f.contains("stroke_width")) {
            config.field.stroke_width = get_number(f, "stroke_width", "config.field");
        }
        if (f.contains("confidence_separation")) {
            config.field.confidence_separation =
                get_number(f, "confidence_separation", "config.field");
        }
        if (f.contains("distance_cap_factor")) {
            config.field.distance_cap_factor = get_number(f, "distance_cap_factor", "config.field");
        }
        if (f.contains("sample_step")) {
            config.field.sample_step = get_number(f, "sample_step", "config.field");
        }
    }
    if (j.contains("zoom")) {
        const Json& z = j["zoom"];
        require_keys(z, {"ratios", "crop_size", "max_crops_per_stage"}, "config.zoom");
        if (z.contains("ratios")) {
            if (!z["ratios"].is_array()) throw SchemaError("config.zoom: ratios must be an array");
            config.zoom.ratios.clear();
            for (const Json& r : z["ratios"]) config.zoom.ratios.push_back(r.get<double>());
        }
        if (z.contains("crop_size")) config.zoom.crop_size = get_number(z, "crop_size", "config.zoom");
        if (z.contains("max_crops_per_stage")) {
            config.zoom.max_crops_per_stage = get_int(z, "max_crops_per_stage", "config.zoom");
        }
    }
    if (j.contains("thresholds")) {
        const Json& t = j["thresholds"];
        require_keys(t, {"mask", "confidence"}, "config.thresholds");
        if (t.contains("mask")) config.options.mask_threshold = get_number(t, "mask", "config");
        if (t.contains("confidence")) {
            config.options.conf_threshold = get_number(t, "confidence", "config");
        }
    }
    if (j.contains("injection_enabled")) {
        config.options.injection_enabled = get_bool(j, "injection_enabled", "config");
    }
    if (j.contains("cluster")) {
        const Json& c = j["cluster"];
        require_keys(c, {"eps", "min_pts"}, "config.cluster");
        if (c.contains("eps")) config.cluster.eps = get_number(c, "eps", "config.cluster");
        if (c.contains("min_pts")) config.cluster.min_pts = get_int(c, "min_pts", "config.cluster");
    }
    if (j.contains("fit")) {
        const Json& f = j["fit"];
        require_keys(f, {"axis", "weight_by_zoom"}, "config.fit");
        if (f.contains("axis")) {
            config.fit.axis = axis_from_name(get_string(f, "axis", "config.fit"), "config.fit");
        }
        if (f.contains("weight_by_zoom")) {
            config.fit.weight_by_zoom = get_bool(f, "weight_by_zoom", "config.fit");
        }
    }
    if (j.contains("metrics")) {
        const Json& m = j["metrics"];
        require_keys(m,
                     {"pixel_thickness", "iou_width", "iou_threshold", "dis_thresh",
                      "area_thresh_factor"},
                     "config.metrics");
        if (m.contains("pixel_thickness")) {
            config.metrics.pixel_thickness = get_number(m, "pixel_thickness", "config.metrics");
        }
        if (m.contains("iou_width")) {
            config.metrics.iou_width = get_number(m, "iou_width", "config.metrics");
        }
        if (m.contains("iou_threshold")) {
            config.metrics.iou_threshold = get_number(m, "iou_threshold", "config.metrics");
        }
        if (m.contains("dis_thresh")) {
            config.metrics.dis_thresh = get_number(m, "dis_thresh", "config.metrics");
        }
        if (m.contains("area_thresh_factor")) {
            config.metrics.area_thresh_factor =
                get_number(m, "area_thresh_factor", "config.metrics");
        }
    }
    if (j.contains("noise")) {
        const Json& n = j["noise"];
        require_keys(n,
                     {"position_sigma", "direction_sigma", "mask_flip_rate",
                      "confidence_flip_rate", "type_confusion_rate"},
                     "config.noise");
        if (n.contains("position_sigma")) {
            config.noise.position_sigma = get_number(n, "position_sigma", "config.noise");
        }
        if (n.contains("direction_sigma")) {
            config.noise.direction_sigma = get_number(n, "direction_sigma", "config.noise");
        }
        if (n.contains("mask_flip_rate")) {
            config.noise.mask_flip_rate = get_number(n, "mask_flip_rate", "config.noise");
        }
        if (n.contains("confidence_flip_rate")) {
            config.noise.confidence_flip_rate =
                get_number(n, "confidence_flip_rate", "config.noise");
        }
        if (n.contains("type_confusion_rate")) {
            config.noise.type_confusion_rate = get_number(n, "type_confusion_rate", "config.noise");
        }
    }
    if (j.contains("merge")) {
        const Json& m = j["merge"];
        require_keys(m,
                     {"sample_step_px", "range_min", "range_max", "gsd_reference", "weight_min",
                      "weight_max", "eps", "min_pts"},
                     "config.merge");
        if (m.contains("sample_step_px")) {
            config.merge.sample_step_px = get_number(m, "sample_step_px", "config.merge");
        }
        if (m.contains("range_min")) config.merge.range_min = get_number(m, "range_min", "config.merge");
        if (m.contains("range_max")) config.merge.range_max = get_number(m, "range_max", "config.merge");
        if (m.contains("gsd_reference")) {
            config.merge.gsd_reference = get_number(m, "gsd_reference", "config.merge");
        }
        if (m.contains("weight_min")) config.merge.weight_min = get_number(m, "weight_min", "config.merge");
        if (m.contains("weight_max")) config.merge.weight_max = get_number(m, "weight_max", "config.merge");
        if (m.contains("eps")) config.merge.cluster.eps = get_number(m, "eps", "config.merge");
        if (m.contains("min_pts")) config.merge.cluster.min_pts = get_int(m, "min_pts", "config.merge");
    }
    if (j.contains("map_eval")) {
        const Json& m = j["map_eval"];
        require_keys(m, {"dis_thresh", "area_thresh_factor", "sample_step", "discretize_step"},
                     "config.map_eval");
        if (m.contains("dis_thresh")) {
            config.map_eval.dis_thresh = get_number(m, "dis_thresh", "config.map_eval");
        }
        if (m.contains("area_thresh_factor")) {
            config.map_eval.area_thresh_factor =
                get_number(m, "area_thresh_factor", "config.map_eval");
        }
        if (m.contains("sample_step")) {
            config.map_eval.sample_step = get_number(m, "sample_step", "config.map_eval");
        }
        if (m.contains("discretize_step")) {
            config.map_eval.discretize_step = get_number(m, "discretize_step", "config.map_eval");
        }
    }
    validate_config(config);
    return config;
}

void validate_config(const PipelineConfig& config) {
    const auto bad = [](const std::string& msg) { throw SchemaError("config: " + msg); };
    if (!(config.field.stride > 0.0)) bad("field.stride must be positive");
    if (!(config.field.stroke_width > 0.0)) bad("field.stroke_width must be positive");
    if (!(config.field.confidence_separation >= 0.0)) bad("field.confidence_separation < 0");
    if (!(config.field.distance_cap_factor > 0.0)) bad("field.distance_cap_factor must be positive");
    if (!(config.field.sample_step > 0.0)) bad("field.sample_step must be positive");
    try {
        validate_schedule(config.zoom);
    } catch (const std::invalid_argument& e) {
        bad(e.what());
    }
    const auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!in01(config.options.mask_threshold)) bad("thresholds.mask outside [0, 1]");
    if (!in01(config.options.conf_threshold)) bad("thresholds.confidence outside [0, 1]");
    if (!(config.cluster.eps > 0.0)) bad("cluster.eps must be positive");
    if (config.cluster.min_pts < 1) bad("cluster.min_pts must be >= 1");
    if (!(config.metrics.pixel_thickness > 0.0)) bad("metrics.pixel_thickness must be positive");
    if (!(config.metrics.iou_width > 0.0)) bad("metrics.iou_width must be positive");
    if (!(config.metrics.iou_threshold > 0.0 && config.metrics.iou_threshold <= 1.0)) {
        bad("metrics.iou_threshold outside (0, 1]");
    }
    if (!(config.metrics.dis_thresh > 0.0)) bad("metrics.dis_thresh must be positive");
    if (!(config.metrics.area_thresh_factor > 0.0)) bad("metrics.area_thresh_factor must be positive");
    if (!(config.noise.position_sigma >= 0.0) || !(config.noise.direction_sigma >= 0.0)) {
        bad("noise sigmas must be >= 0");
    }
    if (!in01(config.noise.mask_flip_rate) || !in01(config.noise.confidence_flip_rate) ||
        !in01(config.noise.type_confusion_rate)) {
        bad("noise rates outside [0, 1]");
    }
    if (!(config.merge.sample_step_px > 0.0)) bad("merge.sample_step_px must be positive");
    if (!(config.merge.range_max > config.merge.range_min)) bad("merge range invalid");
    if (!(config.merge.gsd_reference > 0.0)) bad("merge.gsd_reference must be positive");
    if (!(config.merge.weight_max >= config.merge.weight_min && config.merge.weight_min > 0.0)) {
        bad("merge weight clamp invalid");
    }
    if (!(config.merge.cluster.eps > 0.0) || config.merge.cluster.min_pts < 1) {
        bad("merge cluster params invalid");
    }
    if (!(config.map_eval.dis_thresh > 0.0)) bad("map_eval.dis_thresh must be positive");
    if (!(config.map_eval.sample_step > 0.0) || !(config.map_eval.discretize_step > 0.0)) {
        bad("map_eval steps must be positive");
    }
}

// --- run manifest --------------------------------------------------------------------

Json manifest_to_json(const RunManifest& manifest) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["tool_version"] = manifest.tool_version;
    j["config_hash"] = manifest.config_hash;
    Json inputs = Json::object();
    for (const ManifestEntry& e : manifest.inputs) inputs[e.path] = e.hash;
    j["inputs"] = inputs;
    Json timings = Json::object();
    for (const auto& [name, ms] : manifest.wall_clock_ms) timings[name] = ms;
    j["wall_clock_ms"] = timings;
    return j;
}

// --- helpers ----------------------------------------------------------------------------

std::uint64_t fnv1a64(std::span<const char> bytes) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (char c : bytes) {
        hash ^= static_cast<unsigned char>(c);
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::string hash_hex(std::span<const char> bytes) {
    std::ostringstream out;
    out << std::hex;
    out.width(16);
    out.fill('0');
    out << fnv1a64(bytes);
    return out.str();
}

std::string hash_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("cannot open file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string data = buf.str();
    return hash_hex(std::span<const char>(data.data(), data.size()));
}

std::string hash_json(const Json& j) {
    const std::string data = j.dump();
    return hash_hex(std::span<const char>(data.data(), data.size()));
}

Json load_json(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("cannot open file: " + path.string());
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError("cannot parse " + path.string() + ": " + e.what());
    }
}

void save_json(const std::filesystem::path& path, const Json& j) {
    save_text(path, j.dump(2) + "\n");
}

void save_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SchemaError("cannot write file: " + path.string());
    out << text;
}

}  // namespace lanemap
