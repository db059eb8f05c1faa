// Python bindings for the core operations: geometry, plane estimation,
// tracking, mapping, simulation, the full pipeline, and evaluation.
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rowmap/evaluation.hpp"
#include "rowmap/json_io.hpp"
#include "rowmap/pipeline.hpp"

namespace py = pybind11;
using namespace rowmap;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Row-crop plane estimation, stalk tracking, and semantic mapping";

  py::register_exception<Error>(m, "RowmapError");

  // --- Geometry -----------------------------------------------------------
  py::class_<Pixel>(m, "Pixel")
      .def(py::init<>())
      .def(py::init([](double u, double v) { return Pixel{u, v}; }), py::arg("u"),
           py::arg("v"))
      .def_readwrite("u", &Pixel::u)
      .def_readwrite("v", &Pixel::v)
      .def("__repr__", [](const Pixel& p) {
        return "Pixel(" + std::to_string(p.u) + ", " + std::to_string(p.v) + ")";
      });

  py::class_<CameraIntrinsics>(m, "CameraIntrinsics")
      .def(py::init<>())
      .def(py::init([](double fx, double fy, double cx, double cy) {
             return CameraIntrinsics{fx, fy, cx, cy};
           }),
           py::arg("fx"), py::arg("fy"), py::arg("cx"), py::arg("cy"))
      .def_readwrite("fx", &CameraIntrinsics::fx)
      .def_readwrite("fy", &CameraIntrinsics::fy)
      .def_readwrite("cx", &CameraIntrinsics::cx)
      .def_readwrite("cy", &CameraIntrinsics::cy)
      .def("matrix", &CameraIntrinsics::matrix);

  py::class_<RigidTransform>(m, "RigidTransform")
      .def(py::init<>())
      .def(py::init([](const Eigen::Matrix3d& R, const Eigen::Vector3d& c) {
             return RigidTransform{R, c};
           }),
           py::arg("rotation"), py::arg("translation"))
      .def_readwrite("rotation", &RigidTransform::rotation)
      .def_readwrite("translation", &RigidTransform::translation)
      .def("apply", &RigidTransform::apply)
      .def("inverse", &RigidTransform::inverse);

  py::class_<Plane>(m, "Plane")
      .def(py::init<>())
      .def(py::init([](const Eigen::Vector3d& n, double d) { return Plane{n, d}; }),
           py::arg("normal"), py::arg("offset"))
      .def_readwrite("normal", &Plane::normal)
      .def_readwrite("offset", &Plane::offset)
      .def("signed_distance", &Plane::signed_distance);

  m.def("compose", &compose, py::arg("outer"), py::arg("inner"));
  m.def("transform_plane", &transform_plane, py::arg("transform"), py::arg("plane"));
  m.def("project", &project, py::arg("intrinsics"), py::arg("point"));
  m.def("backproject_ray", &backproject_ray, py::arg("intrinsics"), py::arg("pixel"));
  m.def("intersect_ray_plane", &intersect_ray_plane, py::arg("origin"), py::arg("direction"),
        py::arg("plane"));
  m.def("plane_homography", &plane_homography, py::arg("intrinsics"), py::arg("transform"),
        py::arg("plane"));
  m.def("apply_homography", &apply_homography, py::arg("homography"), py::arg("pixel"));

  // --- Plane estimation ----------------------------------------------------
  py::class_<FeatureMatch>(m, "FeatureMatch")
      .def(py::init<>())
      .def(py::init([](const Pixel& a, const Pixel& b) { return FeatureMatch{a, b}; }),
           py::arg("px1"), py::arg("px2"))
      .def_readwrite("px1", &FeatureMatch::px1)
      .def_readwrite("px2", &FeatureMatch::px2);

  py::class_<PlaneFit>(m, "PlaneFit")
      .def_readonly("plane", &PlaneFit::plane)
      .def_readonly("inlier_indices", &PlaneFit::inlier_indices)
      .def_readonly("rms_residual", &PlaneFit::rms_residual);

  py::class_<PcaAxes>(m, "PcaAxes")
      .def_readonly("axes", &PcaAxes::axes)
      .def_readonly("eigenvalues", &PcaAxes::eigenvalues);

  py::class_<CornPlaneEstimate>(m, "CornPlaneEstimate")
      .def_readonly("plane", &CornPlaneEstimate::plane)
      .def_readonly("inlier_count", &CornPlaneEstimate::inlier_count)
      .def_readonly("rms_residual", &CornPlaneEstimate::rms_residual);

  py::class_<PlaneDistanceParams>(m, "PlaneDistanceParams")
      .def(py::init<>())
      .def_readwrite("min_translation", &PlaneDistanceParams::min_translation)
      .def_readwrite("inlier_px", &PlaneDistanceParams::inlier_px)
      .def_readwrite("iterations", &PlaneDistanceParams::iterations)
      .def_readwrite("seed", &PlaneDistanceParams::seed);

  py::class_<SideviewParams>(m, "SideviewParams")
      .def(py::init<>())
      .def_readwrite("inlier_m", &SideviewParams::inlier_m)
      .def_readwrite("iterations", &SideviewParams::iterations)
      .def_readwrite("seed", &SideviewParams::seed);

  m.def("ransac_plane_fit", &ransac_plane_fit, py::arg("points"), py::arg("threshold"),
        py::arg("iterations"), py::arg("seed"));
  m.def("downsample_uniform", &downsample_uniform, py::arg("points"), py::arg("cell"));
  m.def("pca_axes", &pca_axes, py::arg("points"));
  m.def("corn_plane_normal", &corn_plane_normal, py::arg("ground_normal"),
        py::arg("row_direction"));
  m.def("estimate_plane_distance", &estimate_plane_distance, py::arg("matches"),
        py::arg("intrinsics"), py::arg("motion"), py::arg("plane_normal"),
        py::arg("params") = PlaneDistanceParams{});
  m.def("corridor_plane", &corridor_plane, py::arg("vanishing_point"), py::arg("line_pixel"),
        py::arg("intrinsics"), py::arg("ground"));
  m.def("sideview_plane_distance", &sideview_plane_distance, py::arg("points"),
        py::arg("plane_normal"), py::arg("params") = SideviewParams{});

  // --- Tracking -------------------------------------------------------------
  py::class_<BBox>(m, "BBox")
      .def(py::init<>())
      .def(py::init([](double x0, double y0, double x1, double y1) {
             return BBox{x0, y0, x1, y1};
           }),
           py::arg("x_min"), py::arg("y_min"), py::arg("x_max"), py::arg("y_max"))
      .def_readwrite("x_min", &BBox::x_min)
      .def_readwrite("y_min", &BBox::y_min)
      .def_readwrite("x_max", &BBox::x_max)
      .def_readwrite("y_max", &BBox::y_max)
      .def("width", &BBox::width)
      .def("height", &BBox::height)
      .def("centroid", &BBox::centroid);

  py::class_<Detection>(m, "Detection")
      .def(py::init<>())
      .def(py::init([](const BBox& b, double score, int frame) {
             return Detection{b, score, frame};
           }),
           py::arg("bbox"), py::arg("score") = 1.0, py::arg("frame") = 0)
      .def_readwrite("bbox", &Detection::bbox)
      .def_readwrite("score", &Detection::score)
      .def_readwrite("frame", &Detection::frame);

  py::class_<SortParams>(m, "SortParams")
      .def(py::init<>())
      .def_readwrite("iou_gate", &SortParams::iou_gate)
      .def_readwrite("max_age", &SortParams::max_age)
      .def_readwrite("min_hits", &SortParams::min_hits);

  py::class_<TrackedBox>(m, "TrackedBox")
      .def_readonly("id", &TrackedBox::id)
      .def_readonly("bbox", &TrackedBox::bbox)
      .def_readonly("detection_index", &TrackedBox::detection_index);

  py::class_<SortTracker>(m, "SortTracker")
      .def(py::init<>())
      .def(py::init<const SortParams&>(), py::arg("params"))
      .def("step", &SortTracker::step, py::arg("detections"))
      .def("frame_count", &SortTracker::frame_count);

  m.def("iou", &iou, py::arg("a"), py::arg("b"));
  m.def("hungarian_min_cost", &hungarian_min_cost, py::arg("cost"));

  // --- Mapping ---------------------------------------------------------------
  py::class_<StalkObservation>(m, "StalkObservation")
      .def(py::init<>())
      .def(py::init([](int track_id, int frame, const Eigen::Vector3d& p) {
             return StalkObservation{track_id, frame, p};
           }),
           py::arg("track_id"), py::arg("frame"), py::arg("world_point"))
      .def_readwrite("track_id", &StalkObservation::track_id)
      .def_readwrite("frame", &StalkObservation::frame)
      .def_readwrite("world_point", &StalkObservation::world_point);

  py::class_<StalkLandmark>(m, "StalkLandmark")
      .def_readonly("id", &StalkLandmark::id)
      .def_readonly("position", &StalkLandmark::position)
      .def_readonly("support", &StalkLandmark::support)
      .def_readonly("rejected", &StalkLandmark::rejected)
      .def_readonly("track_ids", &StalkLandmark::track_ids);

  py::class_<SemanticMap>(m, "SemanticMap")
      .def(py::init<>())
      .def_readwrite("landmarks", &SemanticMap::landmarks)
      .def_readwrite("ground", &SemanticMap::ground)
      .def_readwrite("corn", &SemanticMap::corn)
      .def_readwrite("trajectory", &SemanticMap::trajectory);

  py::class_<FinalizeParams>(m, "FinalizeParams")
      .def(py::init<>())
      .def_readwrite("min_support", &FinalizeParams::min_support)
      .def_readwrite("mad_k", &FinalizeParams::mad_k)
      .def_readwrite("merge_radius", &FinalizeParams::merge_radius);

  py::class_<MapBuilder>(m, "MapBuilder")
      .def(py::init<>())
      .def("accumulate", &MapBuilder::accumulate, py::arg("observation"))
      .def("add_frame_planes", &MapBuilder::add_frame_planes, py::arg("ground_world"),
           py::arg("corn_world"))
      .def("add_pose", &MapBuilder::add_pose, py::arg("cam_pose_world"))
      .def("finalize", &MapBuilder::finalize, py::arg("params") = FinalizeParams{})
      .def("empty", &MapBuilder::empty);

  m.def("localize_pixel", &localize_pixel, py::arg("pixel"), py::arg("intrinsics"),
        py::arg("corn_cam"), py::arg("cam_pose_world"));

  // --- Simulator ---------------------------------------------------------------
  py::class_<FieldSpec>(m, "FieldSpec")
      .def(py::init<>())
      .def_readwrite("stalk_count", &FieldSpec::stalk_count)
      .def_readwrite("mean_spacing", &FieldSpec::mean_spacing)
      .def_readwrite("spacing_jitter", &FieldSpec::spacing_jitter)
      .def_readwrite("row_width", &FieldSpec::row_width)
      .def_readwrite("stalk_height", &FieldSpec::stalk_height)
      .def_readwrite("stalk_width", &FieldSpec::stalk_width)
      .def_readwrite("weed_outlier_rate", &FieldSpec::weed_outlier_rate);

  py::class_<TrajectorySpec>(m, "TrajectorySpec")
      .def(py::init<>())
      .def_readwrite("length", &TrajectorySpec::length)
      .def_readwrite("speed", &TrajectorySpec::speed)
      .def_readwrite("start_x", &TrajectorySpec::start_x)
      .def_readwrite("camera_height", &TrajectorySpec::camera_height);

  py::class_<NoiseSpec>(m, "NoiseSpec")
      .def(py::init<>())
      .def_static("realistic", &NoiseSpec::realistic)
      .def_readwrite("pixel_sigma", &NoiseSpec::pixel_sigma)
      .def_readwrite("match_outlier_rate", &NoiseSpec::match_outlier_rate)
      .def_readwrite("depth_sigma", &NoiseSpec::depth_sigma)
      .def_readwrite("detect_dropout", &NoiseSpec::detect_dropout)
      .def_readwrite("false_positive_rate", &NoiseSpec::false_positive_rate)
      .def_readwrite("odom_rot_sigma", &NoiseSpec::odom_rot_sigma)
      .def_readwrite("odom_trans_sigma", &NoiseSpec::odom_trans_sigma);

  py::class_<SimSpec>(m, "SimSpec")
      .def(py::init<>())
      .def_readwrite("field", &SimSpec::field)
      .def_readwrite("trajectory", &SimSpec::trajectory)
      .def_readwrite("noise", &SimSpec::noise);

  py::class_<GroundTruth>(m, "GroundTruth")
      .def_readonly("stalk_positions", &GroundTruth::stalk_positions)
      .def_readonly("neighbor_gaps", &GroundTruth::neighbor_gaps)
      .def_readonly("ground_plane", &GroundTruth::ground_plane)
      .def_readonly("corn_plane", &GroundTruth::corn_plane)
      .def_readonly("trajectory", &GroundTruth::trajectory);

  py::class_<FrameBundle>(m, "FrameBundle")
      .def_readonly("frame", &FrameBundle::frame)
      .def_readonly("odometry", &FrameBundle::odometry)
      .def_readonly("detections", &FrameBundle::detections)
      .def_readonly("matches", &FrameBundle::matches)
      .def_readonly("ground_points", &FrameBundle::ground_points)
      .def_readonly("box_points", &FrameBundle::box_points);

  py::class_<ObservationLog>(m, "ObservationLog")
      .def_readonly("seed", &ObservationLog::seed)
      .def_readonly("scene", &ObservationLog::scene)
      .def_readonly("frames", &ObservationLog::frames);

  m.def("simulate", &simulate, py::arg("spec"), py::arg("seed"));
  m.def("write_log", &write_log, py::arg("log"), py::arg("path"),
        py::arg("with_timestamp") = true);
  m.def("read_log", &read_log, py::arg("path"));

  // --- Pipeline and evaluation ---------------------------------------------------
  py::enum_<PlaneSource>(m, "PlaneSource")
      .value("SfmDistance", PlaneSource::SfmDistance)
      .value("Corridor", PlaneSource::Corridor)
      .value("DepthRansac", PlaneSource::DepthRansac);
  py::enum_<TrackerKind>(m, "TrackerKind")
      .value("Sort", TrackerKind::Sort)
      .value("Flow", TrackerKind::Flow);
  py::enum_<OdomProfile>(m, "OdomProfile")
      .value("Base", OdomProfile::Base)
      .value("Front", OdomProfile::Front)
      .value("Side", OdomProfile::Side);

  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_readwrite("plane_source", &RunConfig::plane_source)
      .def_readwrite("tracker", &RunConfig::tracker)
      .def_readwrite("odometry", &RunConfig::odometry)
      .def_readwrite("finalize", &RunConfig::finalize)
      .def_readwrite("seed", &RunConfig::seed);

  py::class_<TrackedItem>(m, "TrackedItem")
      .def_readonly("track_id", &TrackedItem::track_id)
      .def_readonly("pixel", &TrackedItem::pixel)
      .def_readonly("detection_index", &TrackedItem::detection_index);

  py::class_<FrameTracks>(m, "FrameTracks")
      .def_readonly("frame", &FrameTracks::frame)
      .def_readonly("items", &FrameTracks::items);

  py::class_<PipelineResult>(m, "PipelineResult")
      .def_readonly("map", &PipelineResult::map)
      .def_readonly("tracks", &PipelineResult::tracks)
      .def_readonly("poses", &PipelineResult::poses)
      .def_readonly("frames_with_plane", &PipelineResult::frames_with_plane)
      .def_readonly("frames_total", &PipelineResult::frames_total);

  m.def("run_pipeline", &run_pipeline, py::arg("log"), py::arg("config") = RunConfig{});

  py::class_<MetricReport>(m, "MetricReport")
      .def_readonly("epsilon1_cm", &MetricReport::epsilon1_cm)
      .def_readonly("epsilon2_px", &MetricReport::epsilon2_px)
      .def_readonly("matched", &MetricReport::matched)
      .def_readonly("unmatched", &MetricReport::unmatched);

  py::class_<MethodSpec>(m, "MethodSpec")
      .def_readwrite("name", &MethodSpec::name)
      .def_readwrite("config", &MethodSpec::config);

  py::class_<BenchmarkRow>(m, "BenchmarkRow")
      .def_readonly("method", &BenchmarkRow::method)
      .def_readonly("epsilon1_cm", &BenchmarkRow::epsilon1_cm)
      .def_readonly("epsilon2_px", &BenchmarkRow::epsilon2_px)
      .def_readonly("matched", &BenchmarkRow::matched)
      .def_readonly("unmatched", &BenchmarkRow::unmatched);

  m.def(
      "epsilon1_cm",
      [](const SemanticMap& map, const GroundTruth& scene,
         const std::vector<RigidTransform>& poses) {
        int matched = 0;
        int unmatched = 0;
        const double value = epsilon1_cm(map, scene, poses, &matched, &unmatched);
        return py::make_tuple(value, matched, unmatched);
      },
      py::arg("map"), py::arg("scene"), py::arg("poses"),
      "Returns (epsilon1_cm, matched, unmatched)");
  m.def("epsilon2_px", &epsilon2_px, py::arg("map"), py::arg("tracks"), py::arg("poses"),
        py::arg("intrinsics"));
  m.def("evaluate_run", &evaluate_run, py::arg("result"), py::arg("scene"),
        py::arg("intrinsics"));
  m.def("default_method_table", &default_method_table);
  m.def("run_benchmark", &run_benchmark, py::arg("log"), py::arg("methods"));
  m.def("benchmark_csv", &benchmark_csv, py::arg("rows"));
}
