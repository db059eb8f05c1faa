#include "rowmap/json_io.hpp"

#include <ctime>
#include <fstream>
#include <sstream>

namespace rowmap {

using nlohmann::json;

namespace {

std::string utc_now() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

std::string odometry_frame_name(OdometryFrame f) {
  return f == OdometryFrame::Back ? "back" : "side";
}
OdometryFrame odometry_frame_value(const std::string& s) {
  if (s == "side") return OdometryFrame::Side;
  if (s == "back") return OdometryFrame::Back;
  throw Error(ErrorCode::SchemaError, "unknown odometry frame '" + s + "'");
}

std::string plane_source_name(PlaneSource p) {
  switch (p) {
    case PlaneSource::Corridor: return "corridor";
    case PlaneSource::DepthRansac: return "depth_ransac";
    case PlaneSource::SfmDistance: break;
  }
  return "sfm_distance";
}
PlaneSource plane_source_value(const std::string& s) {
  if (s == "sfm_distance") return PlaneSource::SfmDistance;
  if (s == "corridor") return PlaneSource::Corridor;
  if (s == "depth_ransac") return PlaneSource::DepthRansac;
  throw Error(ErrorCode::SchemaError, "unknown plane source '" + s + "'");
}

std::string tracker_name(TrackerKind t) { return t == TrackerKind::Flow ? "flow" : "box"; }
TrackerKind tracker_value(const std::string& s) {
  if (s == "box") return TrackerKind::Sort;
  if (s == "flow") return TrackerKind::Flow;
  throw Error(ErrorCode::SchemaError, "unknown tracker '" + s + "'");
}

std::string odom_profile_name(OdomProfile p) {
  switch (p) {
    case OdomProfile::Front: return "front";
    case OdomProfile::Side: return "side";
    case OdomProfile::Base: break;
  }
  return "base";
}
OdomProfile odom_profile_value(const std::string& s) {
  if (s == "base") return OdomProfile::Base;
  if (s == "front") return OdomProfile::Front;
  if (s == "side") return OdomProfile::Side;
  throw Error(ErrorCode::SchemaError, "unknown odometry profile '" + s + "'");
}

}  // namespace

void to_json(json& j, const Pixel& v) { j = json::array({v.u, v.v}); }
void from_json(const json& j, Pixel& v) {
  v.u = j.at(0).get<double>();
  v.v = j.at(1).get<double>();
}

void to_json(json& j, const CameraIntrinsics& v) {
  j = json{{"fx", v.fx}, {"fy", v.fy}, {"cx", v.cx}, {"cy", v.cy}};
}
void from_json(const json& j, CameraIntrinsics& v) {
  v.fx = j.value("fx", v.fx);
  v.fy = j.value("fy", v.fy);
  v.cx = j.value("cx", v.cx);
  v.cy = j.value("cy", v.cy);
}

void to_json(json& j, const RigidTransform& v) {
  j = json{{"R", v.rotation}, {"c", v.translation}};
}
void from_json(const json& j, RigidTransform& v) {
  v.rotation = j.value("R", v.rotation);
  v.translation = j.value("c", v.translation);
}

void to_json(json& j, const Plane& v) { j = json{{"n", v.normal}, {"d", v.offset}}; }
void from_json(const json& j, Plane& v) {
  v.normal = j.value("n", v.normal);
  v.offset = j.value("d", v.offset);
}

void to_json(json& j, const BBox& v) { j = json::array({v.x_min, v.y_min, v.x_max, v.y_max}); }
void from_json(const json& j, BBox& v) {
  v.x_min = j.at(0).get<double>();
  v.y_min = j.at(1).get<double>();
  v.x_max = j.at(2).get<double>();
  v.y_max = j.at(3).get<double>();
}

void to_json(json& j, const Detection& v) {
  j = json{{"box", v.bbox}, {"score", v.score}, {"frame", v.frame}};
}
void from_json(const json& j, Detection& v) {
  v.bbox = j.value("box", v.bbox);
  v.score = j.value("score", v.score);
  v.frame = j.value("frame", v.frame);
}

void to_json(json& j, const FeatureMatch& v) { j = json{{"p1", v.px1}, {"p2", v.px2}}; }
void from_json(const json& j, FeatureMatch& v) {
  v.px1 = j.value("p1", v.px1);
  v.px2 = j.value("p2", v.px2);
}

void to_json(json& j, const FieldSpec& v) {
  j = json{{"stalk_count", v.stalk_count},
           {"mean_spacing", v.mean_spacing},
           {"spacing_jitter", v.spacing_jitter},
           {"row_width", v.row_width},
           {"stalk_height", v.stalk_height},
           {"stalk_width", v.stalk_width},
           {"weed_outlier_rate", v.weed_outlier_rate}};
}
void from_json(const json& j, FieldSpec& v) {
  v.stalk_count = j.value("stalk_count", v.stalk_count);
  v.mean_spacing = j.value("mean_spacing", v.mean_spacing);
  v.spacing_jitter = j.value("spacing_jitter", v.spacing_jitter);
  v.row_width = j.value("row_width", v.row_width);
  v.stalk_height = j.value("stalk_height", v.stalk_height);
  v.stalk_width = j.value("stalk_width", v.stalk_width);
  v.weed_outlier_rate = j.value("weed_outlier_rate", v.weed_outlier_rate);
}

void to_json(json& j, const CameraSpec& v) {
  j = json{{"intrinsics", v.intrinsics},
           {"extrinsic", v.extrinsic},
           {"width", v.width},
           {"height", v.height}};
}
void from_json(const json& j, CameraSpec& v) {
  v.intrinsics = j.value("intrinsics", v.intrinsics);
  v.extrinsic = j.value("extrinsic", v.extrinsic);
  v.width = j.value("width", v.width);
  v.height = j.value("height", v.height);
}

void to_json(json& j, const RigSpec& v) {
  j = json{{"front", v.front},
           {"side", v.side},
           {"back", v.back},
           {"frame_rate", v.frame_rate},
           {"odometry_frame", odometry_frame_name(v.odometry_frame)}};
}
void from_json(const json& j, RigSpec& v) {
  v.front = j.value("front", v.front);
  v.side = j.value("side", v.side);
  v.back = j.value("back", v.back);
  v.frame_rate = j.value("frame_rate", v.frame_rate);
  if (j.contains("odometry_frame")) {
    v.odometry_frame = odometry_frame_value(j.at("odometry_frame").get<std::string>());
  }
}

void to_json(json& j, const WobbleSpec& v) {
  j = json{{"lateral_amp", v.lateral_amp}, {"yaw_amp", v.yaw_amp}, {"period", v.period}};
}
void from_json(const json& j, WobbleSpec& v) {
  v.lateral_amp = j.value("lateral_amp", v.lateral_amp);
  v.yaw_amp = j.value("yaw_amp", v.yaw_amp);
  v.period = j.value("period", v.period);
}

void to_json(json& j, const TrajectorySpec& v) {
  j = json{{"length", v.length},
           {"speed", v.speed},
           {"start_x", v.start_x},
           {"camera_height", v.camera_height},
           {"wobble", v.wobble}};
}
void from_json(const json& j, TrajectorySpec& v) {
  v.length = j.value("length", v.length);
  v.speed = j.value("speed", v.speed);
  v.start_x = j.value("start_x", v.start_x);
  v.camera_height = j.value("camera_height", v.camera_height);
  v.wobble = j.value("wobble", v.wobble);
}

void to_json(json& j, const NoiseSpec& v) {
  j = json{{"pixel_sigma", v.pixel_sigma},
           {"match_outlier_rate", v.match_outlier_rate},
           {"depth_sigma", v.depth_sigma},
           {"detect_dropout", v.detect_dropout},
           {"false_positive_rate", v.false_positive_rate},
           {"odom_rot_sigma", v.odom_rot_sigma},
           {"odom_trans_sigma", v.odom_trans_sigma},
           {"vp_sigma", v.vp_sigma},
           {"vp_bias_px", v.vp_bias_px},
           {"flow_sigma", v.flow_sigma},
           {"box_outlier_rate", v.box_outlier_rate},
           {"front_odom_factor", v.front_odom_factor},
           {"side_odom_factor", v.side_odom_factor}};
}
void from_json(const json& j, NoiseSpec& v) {
  v.pixel_sigma = j.value("pixel_sigma", v.pixel_sigma);
  v.match_outlier_rate = j.value("match_outlier_rate", v.match_outlier_rate);
  v.depth_sigma = j.value("depth_sigma", v.depth_sigma);
  v.detect_dropout = j.value("detect_dropout", v.detect_dropout);
  v.false_positive_rate = j.value("false_positive_rate", v.false_positive_rate);
  v.odom_rot_sigma = j.value("odom_rot_sigma", v.odom_rot_sigma);
  v.odom_trans_sigma = j.value("odom_trans_sigma", v.odom_trans_sigma);
  v.vp_sigma = j.value("vp_sigma", v.vp_sigma);
  v.vp_bias_px = j.value("vp_bias_px", v.vp_bias_px);
  v.flow_sigma = j.value("flow_sigma", v.flow_sigma);
  v.box_outlier_rate = j.value("box_outlier_rate", v.box_outlier_rate);
  v.front_odom_factor = j.value("front_odom_factor", v.front_odom_factor);
  v.side_odom_factor = j.value("side_odom_factor", v.side_odom_factor);
}

void to_json(json& j, const SamplingSpec& v) {
  j = json{{"matches_per_frame", v.matches_per_frame},
           {"ground_grid_x", v.ground_grid_x},
           {"ground_grid_y", v.ground_grid_y},
           {"box_points_per_detection", v.box_points_per_detection},
           {"redetect_every", v.redetect_every}};
}
void from_json(const json& j, SamplingSpec& v) {
  v.matches_per_frame = j.value("matches_per_frame", v.matches_per_frame);
  v.ground_grid_x = j.value("ground_grid_x", v.ground_grid_x);
  v.ground_grid_y = j.value("ground_grid_y", v.ground_grid_y);
  v.box_points_per_detection = j.value("box_points_per_detection", v.box_points_per_detection);
  v.redetect_every = j.value("redetect_every", v.redetect_every);
}

void to_json(json& j, const SimSpec& v) {
  j = json{{"field", v.field},
           {"rig", v.rig},
           {"trajectory", v.trajectory},
           {"noise", v.noise},
           {"sampling", v.sampling}};
}
void from_json(const json& j, SimSpec& v) {
  v.field = j.value("field", v.field);
  v.rig = j.value("rig", v.rig);
  v.trajectory = j.value("trajectory", v.trajectory);
  v.noise = j.value("noise", v.noise);
  v.sampling = j.value("sampling", v.sampling);
}

void to_json(json& j, const GroundTruth& v) {
  j = json{{"stalks", v.stalk_positions},
           {"gaps", v.neighbor_gaps},
           {"ground", v.ground_plane},
           {"corn", v.corn_plane},
           {"trajectory", v.trajectory}};
}
void from_json(const json& j, GroundTruth& v) {
  v.stalk_positions = j.value("stalks", v.stalk_positions);
  v.neighbor_gaps = j.value("gaps", v.neighbor_gaps);
  v.ground_plane = j.value("ground", v.ground_plane);
  v.corn_plane = j.value("corn", v.corn_plane);
  v.trajectory = j.value("trajectory", v.trajectory);
}

void to_json(json& j, const VanishingPointObs& v) {
  j = json{{"px", v.px}, {"slope_near", v.slope_near}, {"slope_far", v.slope_far}};
}
void from_json(const json& j, VanishingPointObs& v) {
  v.px = j.value("px", v.px);
  v.slope_near = j.value("slope_near", v.slope_near);
  v.slope_far = j.value("slope_far", v.slope_far);
}

void to_json(json& j, const FrameTruth& v) {
  j = json{{"pose", v.side_pose_world},
           {"corn_cam", v.corn_plane_cam},
           {"ground_cam", v.ground_plane_cam},
           {"stalk_ids", v.stalk_ids}};
}
void from_json(const json& j, FrameTruth& v) {
  v.side_pose_world = j.value("pose", v.side_pose_world);
  v.corn_plane_cam = j.value("corn_cam", v.corn_plane_cam);
  v.ground_plane_cam = j.value("ground_cam", v.ground_plane_cam);
  v.stalk_ids = j.value("stalk_ids", v.stalk_ids);
}

void to_json(json& j, const FrameBundle& v) {
  j = json{{"frame", v.frame},
           {"odometry", v.odometry},
           {"odometry_front", v.odometry_front},
           {"odometry_side", v.odometry_side},
           {"detections", v.detections},
           {"matches", v.matches},
           {"displacements", v.displacements},
           {"ground_points", v.ground_points},
           {"box_points", v.box_points},
           {"vp", v.vp},
           {"truth", v.truth}};
}
void from_json(const json& j, FrameBundle& v) {
  v.frame = j.value("frame", v.frame);
  v.odometry = j.value("odometry", v.odometry);
  v.odometry_front = j.value("odometry_front", v.odometry_front);
  v.odometry_side = j.value("odometry_side", v.odometry_side);
  v.detections = j.value("detections", v.detections);
  v.matches = j.value("matches", v.matches);
  v.displacements = j.value("displacements", v.displacements);
  v.ground_points = j.value("ground_points", v.ground_points);
  v.box_points = j.value("box_points", v.box_points);
  v.vp = j.value("vp", v.vp);
  v.truth = j.value("truth", v.truth);
}

void to_json(json& j, const StalkLandmark& v) {
  j = json{{"id", v.id},
           {"position_m", v.position},
           {"support", v.support},
           {"rejected", v.rejected},
           {"track_ids", v.track_ids}};
}
void from_json(const json& j, StalkLandmark& v) {
  v.id = j.value("id", v.id);
  v.position = j.value("position_m", v.position);
  v.support = j.value("support", v.support);
  v.rejected = j.value("rejected", v.rejected);
  v.track_ids = j.value("track_ids", v.track_ids);
}

void to_json(json& j, const SemanticMap& v) {
  j = json{{"landmarks", v.landmarks},
           {"ground", v.ground},
           {"corn", v.corn},
           {"trajectory", v.trajectory}};
}
void from_json(const json& j, SemanticMap& v) {
  v.landmarks = j.value("landmarks", v.landmarks);
  v.ground = j.value("ground", v.ground);
  v.corn = j.value("corn", v.corn);
  v.trajectory = j.value("trajectory", v.trajectory);
}

void to_json(json& j, const TrackedItem& v) {
  j = json::array({v.track_id, v.pixel.u, v.pixel.v, v.detection_index});
}
void from_json(const json& j, TrackedItem& v) {
  v.track_id = j.at(0).get<int>();
  v.pixel.u = j.at(1).get<double>();
  v.pixel.v = j.at(2).get<double>();
  v.detection_index = j.at(3).get<int>();
}

void to_json(json& j, const FrameTracks& v) {
  j = json{{"frame", v.frame}, {"items", v.items}};
}
void from_json(const json& j, FrameTracks& v) {
  v.frame = j.value("frame", v.frame);
  v.items = j.value("items", v.items);
}

void to_json(json& j, const GroundFitParams& v) {
  j = json{{"threshold", v.threshold},
           {"iterations", v.iterations},
           {"cell", v.cell},
           {"min_axis_ratio", v.min_axis_ratio}};
}
void from_json(const json& j, GroundFitParams& v) {
  v.threshold = j.value("threshold", v.threshold);
  v.iterations = j.value("iterations", v.iterations);
  v.cell = j.value("cell", v.cell);
  v.min_axis_ratio = j.value("min_axis_ratio", v.min_axis_ratio);
}

void to_json(json& j, const PlaneDistanceParams& v) {
  j = json{{"min_translation", v.min_translation},
           {"inlier_px", v.inlier_px},
           {"iterations", v.iterations},
           {"seed", v.seed}};
}
void from_json(const json& j, PlaneDistanceParams& v) {
  v.min_translation = j.value("min_translation", v.min_translation);
  v.inlier_px = j.value("inlier_px", v.inlier_px);
  v.iterations = j.value("iterations", v.iterations);
  v.seed = j.value("seed", v.seed);
}

void to_json(json& j, const SideviewParams& v) {
  j = json{{"inlier_m", v.inlier_m}, {"iterations", v.iterations}, {"seed", v.seed}};
}
void from_json(const json& j, SideviewParams& v) {
  v.inlier_m = j.value("inlier_m", v.inlier_m);
  v.iterations = j.value("iterations", v.iterations);
  v.seed = j.value("seed", v.seed);
}

void to_json(json& j, const KalmanParams& v) {
  j = json{{"measurement_noise", v.measurement_noise},
           {"process_noise", v.process_noise},
           {"initial_covariance", v.initial_covariance}};
}
void from_json(const json& j, KalmanParams& v) {
  v.measurement_noise = j.value("measurement_noise", v.measurement_noise);
  v.process_noise = j.value("process_noise", v.process_noise);
  v.initial_covariance = j.value("initial_covariance", v.initial_covariance);
}

void to_json(json& j, const SortParams& v) {
  j = json{{"iou_gate", v.iou_gate},
           {"max_age", v.max_age},
           {"min_hits", v.min_hits},
           {"kalman", v.kalman}};
}
void from_json(const json& j, SortParams& v) {
  v.iou_gate = j.value("iou_gate", v.iou_gate);
  v.max_age = j.value("max_age", v.max_age);
  v.min_hits = j.value("min_hits", v.min_hits);
  v.kalman = j.value("kalman", v.kalman);
}

void to_json(json& j, const FlowParams& v) {
  j = json{{"redetect_every", v.redetect_every}};
}
void from_json(const json& j, FlowParams& v) {
  v.redetect_every = j.value("redetect_every", v.redetect_every);
}

void to_json(json& j, const FinalizeParams& v) {
  j = json{{"min_support", v.min_support},
           {"mad_k", v.mad_k},
           {"merge_radius", v.merge_radius}};
}
void from_json(const json& j, FinalizeParams& v) {
  v.min_support = j.value("min_support", v.min_support);
  v.mad_k = j.value("mad_k", v.mad_k);
  v.merge_radius = j.value("merge_radius", v.merge_radius);
}

void to_json(json& j, const RunConfig& v) {
  j = json{{"plane_source", plane_source_name(v.plane_source)},
           {"tracker", tracker_name(v.tracker)},
           {"odometry", odom_profile_name(v.odometry)},
           {"ground", v.ground},
           {"plane_distance", v.plane_distance},
           {"sideview", v.sideview},
           {"sort", v.sort},
           {"flow", v.flow},
           {"finalize", v.finalize},
           {"corridor_line_offset_px", v.corridor_line_offset_px},
           {"seed", v.seed}};
}
void from_json(const json& j, RunConfig& v) {
  if (j.contains("plane_source")) {
    v.plane_source = plane_source_value(j.at("plane_source").get<std::string>());
  }
  if (j.contains("tracker")) v.tracker = tracker_value(j.at("tracker").get<std::string>());
  if (j.contains("odometry")) {
    v.odometry = odom_profile_value(j.at("odometry").get<std::string>());
  }
  v.ground = j.value("ground", v.ground);
  v.plane_distance = j.value("plane_distance", v.plane_distance);
  v.sideview = j.value("sideview", v.sideview);
  v.sort = j.value("sort", v.sort);
  v.flow = j.value("flow", v.flow);
  v.finalize = j.value("finalize", v.finalize);
  v.corridor_line_offset_px = j.value("corridor_line_offset_px", v.corridor_line_offset_px);
  v.seed = j.value("seed", v.seed);
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open '" + path + "' for reading");
  }
  try {
    return json::parse(in);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::SchemaError, path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  }
  out << content;
  if (!out) {
    throw Error(ErrorCode::IoError, "failed writing '" + path + "'");
  }
}

void write_log(const ObservationLog& log, const std::string& path, bool with_timestamp) {
  json header{{"format_version", log.format_version},
              {"seed", log.seed},
              {"specs", log.specs},
              {"scene", log.scene}};
  if (with_timestamp) header["generated_at"] = utc_now();
  std::string out = header.dump();
  out.push_back('\n');
  for (const FrameBundle& frame : log.frames) {
    out += json(frame).dump();
    out.push_back('\n');
  }
  write_text_file(path, out);
}

ObservationLog read_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open '" + path + "' for reading");
  }
  ObservationLog log;
  std::string line;
  int line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      if (!have_header) {
        log.format_version = j.value("format_version", -1);
        if (log.format_version != 1) {
          throw Error(ErrorCode::SchemaError,
                      "unsupported format_version " + std::to_string(log.format_version));
        }
        log.seed = j.value("seed", log.seed);
        log.specs = j.value("specs", log.specs);
        log.scene = j.value("scene", log.scene);
        have_header = true;
      } else {
        log.frames.push_back(j.get<FrameBundle>());
      }
    } catch (const std::exception& e) {
      throw Error(ErrorCode::SchemaError,
                  path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!have_header) {
    throw Error(ErrorCode::SchemaError, path + ": empty log (no header line)");
  }
  return log;
}

void write_run(const RunDocument& doc, const std::string& path, bool with_timestamp) {
  json j{{"format_version", doc.format_version},
         {"landmarks", doc.result.map.landmarks},
         {"ground", doc.result.map.ground},
         {"corn", doc.result.map.corn},
         {"trajectory", doc.result.map.trajectory},
         {"tracks", doc.result.tracks},
         {"frames_with_plane", doc.result.frames_with_plane},
         {"frames_total", doc.result.frames_total},
         {"config", doc.config},
         {"camera", doc.camera},
         {"log_seed", doc.log_seed}};
  if (with_timestamp) j["generated_at"] = utc_now();
  write_text_file(path, j.dump(2) + "\n");
}

RunDocument read_run(const std::string& path) {
  const json j = read_json_file(path);
  RunDocument doc;
  try {
    doc.format_version = j.value("format_version", -1);
    if (doc.format_version != 1) {
      throw Error(ErrorCode::SchemaError,
                  "unsupported format_version " + std::to_string(doc.format_version));
    }
    doc.result.map.landmarks = j.value("landmarks", doc.result.map.landmarks);
    doc.result.map.ground = j.value("ground", doc.result.map.ground);
    doc.result.map.corn = j.value("corn", doc.result.map.corn);
    doc.result.map.trajectory = j.value("trajectory", doc.result.map.trajectory);
    doc.result.poses = doc.result.map.trajectory;
    doc.result.tracks = j.value("tracks", doc.result.tracks);
    doc.result.frames_with_plane = j.value("frames_with_plane", 0);
    doc.result.frames_total = j.value("frames_total", 0);
    doc.config = j.value("config", doc.config);
    doc.camera = j.value("camera", doc.camera);
    doc.log_seed = j.value("log_seed", doc.log_seed);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::SchemaError, path + ": " + e.what());
  }
  return doc;
}

void write_scene(const SceneDocument& doc, const std::string& path, bool with_timestamp) {
  json j{{"format_version", doc.format_version}, {"seed", doc.seed}, {"scene", doc.scene}};
  if (with_timestamp) j["generated_at"] = utc_now();
  write_text_file(path, j.dump(2) + "\n");
}

SceneDocument read_scene(const std::string& path) {
  const json j = read_json_file(path);
  SceneDocument doc;
  try {
    doc.format_version = j.value("format_version", -1);
    if (doc.format_version != 1) {
      throw Error(ErrorCode::SchemaError,
                  "unsupported format_version " + std::to_string(doc.format_version));
    }
    doc.seed = j.value("seed", doc.seed);
    doc.scene = j.value("scene", doc.scene);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::SchemaError, path + ": " + e.what());
  }
  return doc;
}

}  // namespace rowmap
