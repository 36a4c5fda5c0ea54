#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "lanemap/io.hpp"
#include "lanemap/svg.hpp"

// Command-line surface of the lane pipeline. Exit codes: 0 success,
// 1 usage error, 2 data error.
namespace {

using namespace lanemap;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

double now_ms() {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

PipelineConfig load_config_or_default(const std::string& path) {
    if (path.empty()) return PipelineConfig{};
    return config_from_json(load_json(path));
}

struct DetectArgs {
    std::string scene_path;
    std::string out_path;
    std::string config_path;
    std::string svg_path;
    std::string manifest_path;
    bool noiseless = false;
    bool no_injection = false;
    std::optional<std::uint64_t> seed;
};

int run_detect(const DetectArgs& args) {
    PipelineConfig config = load_config_or_default(args.config_path);
    Scene scene = scene_from_json(load_json(args.scene_path));
    if (args.seed) scene.seed = *args.seed;
    NoiseModel noise = args.noiseless ? NoiseModel{} : config.noise;
    if (args.no_injection) config.options.injection_enabled = false;
    const FovRule rule =
        config.options.injection_enabled ? FovRule::kBridgeByFov : FovRule::kNeverBridge;

    const double t0 = now_ms();
    SyntheticDetector detector(scene, config.field, noise, rule);
    const PipelineResult result = run_pipeline(detector, scene.image_width, scene.image_height,
                                               config.zoom, config.options);
    const double t1 = now_ms();

    PointsFile file;
    file.image_width = scene.image_width;
    file.image_height = scene.image_height;
    file.points = result.points;
    file.stages = result.stages;
    save_json(args.out_path, points_to_json(file));

    if (!args.svg_path.empty()) {
        save_text(args.svg_path, result_svg(result.points, result.stages, scene.image_width,
                                            scene.image_height));
    }
    if (!args.manifest_path.empty()) {
        RunManifest manifest;
        manifest.config_hash = hash_json(config_to_json(config));
        manifest.inputs.push_back({args.scene_path, hash_file(args.scene_path)});
        manifest.wall_clock_ms.push_back({"detect", t1 - t0});
        save_json(args.manifest_path, manifest_to_json(manifest));
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lane detection post-processing and crowdsourced map construction"};
    app.require_subcommand(1);

    // synth-scene
    auto* synth = app.add_subcommand("synth-scene", "generate a synthetic lane scene");
    RandomSceneParams scene_params;
    std::string synth_out;
    synth->add_option("--seed", scene_params.seed, "scene seed");
    synth->add_option("--width", scene_params.width, "image width, px");
    synth->add_option("--height", scene_params.height, "image height, px");
    synth->add_option("--min-lanes", scene_params.min_lanes, "minimum lane count");
    synth->add_option("--max-lanes", scene_params.max_lanes, "maximum lane count");
    synth->add_option("--gap-probability", scene_params.gap_probability,
                      "chance a dashed lane gets a gap");
    synth->add_option("--out", synth_out, "output scene JSON")->required();

    // detect
    auto* detect = app.add_subcommand("detect", "run the zoom pipeline on a scene");
    DetectArgs detect_args;
    std::uint64_t detect_seed = 0;
    detect->add_option("--scene", detect_args.scene_path, "scene JSON")->required();
    detect->add_option("--out", detect_args.out_path, "output points JSON")->required();
    detect->add_option("--config", detect_args.config_path, "pipeline config JSON");
    detect->add_option("--svg", detect_args.svg_path, "debug SVG of points and uncertain regions");
    detect->add_option("--manifest", detect_args.manifest_path, "run manifest JSON");
    detect->add_flag("--noiseless", detect_args.noiseless, "disable the detector noise model");
    detect->add_flag("--no-injection", detect_args.no_injection,
                     "disable thumbnail context sharing (gaps stay unrecognized)");
    auto* seed_opt = detect->add_option("--seed", detect_seed, "override the scene seed");

    // cluster
    auto* cluster_cmd = app.add_subcommand("cluster", "cluster decoded points");
    std::string cluster_points, cluster_out, cluster_config;
    double cluster_eps = 0.0;
    int cluster_min_pts = 0;
    cluster_cmd->add_option("--points", cluster_points, "points JSON")->required();
    cluster_cmd->add_option("--out", cluster_out, "labeled points JSON")->required();
    cluster_cmd->add_option("--config", cluster_config, "pipeline config JSON");
    auto* eps_opt = cluster_cmd->add_option("--eps", cluster_eps, "neighborhood radius");
    auto* minpts_opt = cluster_cmd->add_option("--min-pts", cluster_min_pts, "core point threshold");

    // fit
    auto* fit_cmd = app.add_subcommand("fit", "fit cubic lanes to labeled points");
    std::string fit_points, fit_out, fit_config, fit_axis;
    bool fit_uniform = false;
    fit_cmd->add_option("--points", fit_points, "labeled points JSON")->required();
    fit_cmd->add_option("--out", fit_out, "lanes JSON")->required();
    fit_cmd->add_option("--config", fit_config, "pipeline config JSON");
    auto* axis_opt = fit_cmd->add_option("--axis", fit_axis, "x_of_y or y_of_x");
    fit_cmd->add_flag("--uniform-weight", fit_uniform, "ignore zoom weights when fitting");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "score predictions against ground truth");
    std::string eval_gt, eval_pred, eval_metric, eval_out, eval_report, eval_config;
    bool eval_require_type = false;
    double eval_thickness = 0.0, eval_iou_width = 0.0, eval_iou_threshold = 0.0,
           eval_dis_thresh = 0.0;
    int eval_image_width = 0, eval_image_height = 0;
    eval_cmd->add_option("--gt", eval_gt, "ground-truth lanes or scene JSON")->required();
    eval_cmd->add_option("--pred", eval_pred, "predicted lanes JSON")->required();
    eval_cmd->add_option("--metric", eval_metric, "pixel | iou | line-match")->required();
    eval_cmd->add_option("--out", eval_out, "match result JSON")->required();
    eval_cmd->add_option("--report", eval_report, "per-line CSV report (line-match only)");
    eval_cmd->add_option("--config", eval_config, "pipeline config JSON");
    auto* thick_opt = eval_cmd->add_option("--thickness", eval_thickness, "pixel metric thickness");
    auto* iouw_opt = eval_cmd->add_option("--iou-width", eval_iou_width, "IoU stroke width");
    auto* iout_opt = eval_cmd->add_option("--iou-threshold", eval_iou_threshold, "IoU threshold");
    auto* dis_opt = eval_cmd->add_option("--dis-thresh", eval_dis_thresh, "endpoint threshold");
    eval_cmd->add_flag("--require-type", eval_require_type, "matches must agree on lane type");
    auto* imgw_opt = eval_cmd->add_option("--image-width", eval_image_width, "pixel metric grid");
    auto* imgh_opt = eval_cmd->add_option("--image-height", eval_image_height, "pixel metric grid");

    // gsp-fit
    auto* gsp_cmd = app.add_subcommand("gsp-fit", "fit per-shot ground surface parameters");
    std::string gsp_ingest, gsp_out;
    double gsp_radius = 25.0;
    gsp_cmd->add_option("--ingest", gsp_ingest, "SfM ingest JSON")->required();
    gsp_cmd->add_option("--out", gsp_out, "per-shot GSP JSON")->required();
    gsp_cmd->add_option("--radius", gsp_radius, "ground point selection radius, m");

    // map-merge
    auto* merge_cmd = app.add_subcommand("map-merge", "project and merge lanes across shots");
    std::string merge_ingest, merge_out, merge_config;
    double merge_radius = 25.0;
    merge_cmd->add_option("--ingest", merge_ingest, "SfM ingest JSON")->required();
    merge_cmd->add_option("--out", merge_out, "merged world lanes JSON")->required();
    merge_cmd->add_option("--config", merge_config, "pipeline config JSON");
    merge_cmd->add_option("--gsp-radius", merge_radius, "ground point selection radius, m");

    // map-eval
    auto* mapeval_cmd = app.add_subcommand("map-eval", "score a merged map against ground truth");
    std::string mapeval_merged, mapeval_map, mapeval_out, mapeval_config;
    mapeval_cmd->add_option("--merged", mapeval_merged, "merged lanes JSON")->required();
    mapeval_cmd->add_option("--map", mapeval_map, "ground-truth map JSON")->required();
    mapeval_cmd->add_option("--out", mapeval_out, "error report JSON")->required();
    mapeval_cmd->add_option("--config", mapeval_config, "pipeline config JSON");

    // plot
    auto* plot_cmd = app.add_subcommand("plot", "render a scene / points / map file as SVG");
    std::string plot_in, plot_out;
    plot_cmd->add_option("--in", plot_in, "input JSON (scene, points, lanes, or map)")->required();
    plot_cmd->add_option("--out", plot_out, "output SVG")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (synth->parsed()) {
            const Scene scene = make_random_scene(scene_params);
            save_json(synth_out, scene_to_json(scene));
            return kExitOk;
        }
        if (detect->parsed()) {
            if (seed_opt->count() > 0) detect_args.seed = detect_seed;
            return run_detect(detect_args);
        }
        if (cluster_cmd->parsed()) {
            PipelineConfig config = load_config_or_default(cluster_config);
            if (eps_opt->count() > 0) config.cluster.eps = cluster_eps;
            if (minpts_opt->count() > 0) config.cluster.min_pts = cluster_min_pts;
            validate_config(config);
            PointsFile file = points_from_json(load_json(cluster_points));
            std::vector<ZoomedPoint> pts;
            pts.reserve(file.points.size());
            for (const DecodedPoint& p : file.points) pts.push_back(p.point);
            const ClusterLabels labels = dbscan(pts, config.cluster);
            file.labels = labels.labels;
            file.cluster_count = labels.cluster_count;
            save_json(cluster_out, points_to_json(file));
            return kExitOk;
        }
        if (fit_cmd->parsed()) {
            PipelineConfig config = load_config_or_default(fit_config);
            if (axis_opt->count() > 0) {
                if (fit_axis != "x_of_y" && fit_axis != "y_of_x") {
                    throw SchemaError("fit: --axis must be x_of_y or y_of_x");
                }
                config.fit.axis = fit_axis == "x_of_y" ? PolyAxis::XofY : PolyAxis::YofX;
            }
            if (fit_uniform) config.fit.weight_by_zoom = false;
            const PointsFile file = points_from_json(load_json(fit_points));
            if (file.labels.empty() && !file.points.empty()) {
                throw SchemaError("fit: points file has no cluster labels; run `cluster` first");
            }
            ClusterLabels labels;
            labels.labels = file.labels;
            labels.cluster_count = file.cluster_count;
            const LaneExtraction extraction =
                clusters_to_lanes(file.points, labels, config.fit);
            Json out = lanes_to_json(records_from_detected(extraction.lanes));
            out["dropped_clusters"] = extraction.dropped_clusters;
            save_json(fit_out, out);
            return kExitOk;
        }
        if (eval_cmd->parsed()) {
            PipelineConfig config = load_config_or_default(eval_config);
            if (thick_opt->count() > 0) config.metrics.pixel_thickness = eval_thickness;
            if (iouw_opt->count() > 0) config.metrics.iou_width = eval_iou_width;
            if (iout_opt->count() > 0) config.metrics.iou_threshold = eval_iou_threshold;
            if (dis_opt->count() > 0) config.metrics.dis_thresh = eval_dis_thresh;
            validate_config(config);

            const auto gt_records = load_lane_set(eval_gt);
            const auto pred_records = load_lane_set(eval_pred);
            std::vector<Polyline> gt_polys, pred_polys;
            std::vector<LaneType> gt_types, pred_types;
            for (const LaneRecord& r : gt_records) {
                gt_polys.push_back(record_to_polyline(r, 1.0));
                gt_types.push_back(r.type);
            }
            for (const LaneRecord& r : pred_records) {
                pred_polys.push_back(record_to_polyline(r, 1.0));
                pred_types.push_back(r.type);
            }

            MatchResult result;
            Json params;
            if (eval_metric == "pixel") {
                int w = eval_image_width, h = eval_image_height;
                if (imgw_opt->count() == 0 || imgh_opt->count() == 0) {
                    // Try the gt file for an image size (scene files carry one).
                    const Json gt_json = load_json(eval_gt);
                    if (gt_json.contains("image")) {
                        w = gt_json["image"]["width"].get<int>();
                        h = gt_json["image"]["height"].get<int>();
                    } else {
                        throw SchemaError(
                            "eval: pixel metric needs --image-width/--image-height or a scene gt");
                    }
                }
                result = pixel_f1(gt_polys, pred_polys, config.metrics.pixel_thickness, w, h);
                params = Json{{"thickness", config.metrics.pixel_thickness},
                              {"image_width", w},
                              {"image_height", h}};
            } else if (eval_metric == "iou") {
                result = iou_f1(gt_polys, pred_polys, config.metrics.iou_width,
                                config.metrics.iou_threshold);
                params = Json{{"width", config.metrics.iou_width},
                              {"threshold", config.metrics.iou_threshold}};
            } else if (eval_metric == "line-match") {
                LineMatchParams lm;
                lm.dis_thresh = config.metrics.dis_thresh;
                lm.area_thresh_factor = config.metrics.area_thresh_factor;
                lm.require_type = eval_require_type;
                const LineMatchReport report =
                    match_lines(gt_polys, gt_types, pred_polys, pred_types, lm);
                result = MatchResult::from_counts(
                    static_cast<long long>(report.matches.size()),
                    static_cast<long long>(report.unmatched_pred.size()),
                    static_cast<long long>(report.unmatched_gt.size()));
                params = Json{{"dis_thresh", lm.dis_thresh},
                              {"area_thresh_factor", lm.area_thresh_factor},
                              {"require_type", lm.require_type}};
                if (!eval_report.empty()) {
                    std::ostringstream csv;
                    csv << "gt_index,pred_index,endpoint_a,endpoint_b,area,mean_offset\n";
                    for (const LineMatchDetail& m : report.matches) {
                        csv << m.gt_index << "," << m.pred_index << "," << m.endpoint_a << ","
                            << m.endpoint_b << "," << m.area << "," << m.mean_offset << "\n";
                    }
                    for (int g : report.unmatched_gt) csv << g << ",,,,,\n";
                    for (int p : report.unmatched_pred) csv << "," << p << ",,,,\n";
                    save_text(eval_report, csv.str());
                }
            } else {
                std::cerr << "eval: unknown metric '" << eval_metric << "'\n";
                return kExitUsage;
            }
            save_json(eval_out, match_result_to_json(result, eval_metric, params));
            return kExitOk;
        }
        if (gsp_cmd->parsed()) {
            const SfmIngest ingest = ingest_from_json(
                load_json(gsp_ingest), std::filesystem::path(gsp_ingest).parent_path());
            Json out;
            out["schema_version"] = kSchemaVersion;
            Json shots = Json::array();
            for (const Shot& shot : ingest.shots) {
                Json e;
                e["id"] = shot.id;
                try {
                    const GroundSurfaceParams gsp =
                        estimate_shot_gsp(shot.pose, ingest.ground_points, gsp_radius);
                    e["gsp"] = Json{{"angle", gsp.angle}, {"height", gsp.height}};
                } catch (const std::invalid_argument& err) {
                    e["error"] = err.what();
                }
                shots.push_back(e);
            }
            out["shots"] = shots;
            save_json(gsp_out, out);
            return kExitOk;
        }
        if (merge_cmd->parsed()) {
            PipelineConfig config = load_config_or_default(merge_config);
            SfmIngest ingest = ingest_from_json(load_json(merge_ingest),
                                                std::filesystem::path(merge_ingest).parent_path());
            for (Shot& shot : ingest.shots) {
                if (shot.gsp) continue;
                try {
                    shot.gsp = estimate_shot_gsp(shot.pose, ingest.ground_points, merge_radius);
                } catch (const std::invalid_argument&) {
                    // left empty; merge_lanes reports it as skipped
                }
            }
            const MergeOutput merged = merge_lanes(ingest.shots, config.merge);
            Json out = lanes_to_json(records_from_detected(merged.lanes));
            out["skipped_shots"] = merged.skipped_shots;
            out["dropped_clusters"] = merged.dropped_clusters;
            save_json(merge_out, out);
            return kExitOk;
        }
        if (mapeval_cmd->parsed()) {
            const PipelineConfig config = load_config_or_default(mapeval_config);
            const auto records = lanes_from_json(load_json(mapeval_merged));
            std::vector<DetectedLane> merged;
            for (const LaneRecord& r : records) {
                if (!r.cubic) throw SchemaError("map-eval: merged lanes must be cubic");
                DetectedLane lane;
                lane.curve = *r.cubic;
                lane.lane_type = r.type;
                lane.support = r.support.value_or(0);
                lane.rms_residual = r.rms_residual.value_or(0.0);
                merged.push_back(lane);
            }
            const GroundTruthMap map = map_from_json(load_json(mapeval_map));
            const MapErrorReport report = map_error(merged, map, config.map_eval);
            save_json(mapeval_out, map_error_to_json(report));
            return kExitOk;
        }
        if (plot_cmd->parsed()) {
            const Json j = load_json(plot_in);
            std::string svg;
            if (j.contains("points")) {
                const PointsFile file = points_from_json(j);
                svg = result_svg(file.points, file.stages, file.image_width, file.image_height);
            } else if (j.contains("image")) {
                svg = scene_svg(scene_from_json(j));
            } else if (j.contains("lanes") && j["lanes"].is_array() && !j["lanes"].empty() &&
                       j["lanes"][0].contains("control_points")) {
                svg = scene_svg(scene_from_json(j));
            } else if (j.contains("lanes") && j["lanes"].is_array() && !j["lanes"].empty() &&
                       j["lanes"][0].contains("vertices")) {
                const GroundTruthMap map = map_from_json(j);
                svg = map_svg({}, &map);
            } else if (j.contains("lanes")) {
                const auto records = lanes_from_json(j);
                std::vector<DetectedLane> lanes;
                for (const LaneRecord& r : records) {
                    if (!r.cubic) continue;
                    DetectedLane lane;
                    lane.curve = *r.cubic;
                    lane.lane_type = r.type;
                    lanes.push_back(lane);
                }
                svg = map_svg(lanes, nullptr);
            } else {
                throw SchemaError("plot: unrecognized input schema");
            }
            save_text(plot_out, svg);
            return kExitOk;
        }
    } catch (const SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
