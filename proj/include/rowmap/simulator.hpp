#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rowmap/geometry.hpp"
#include "rowmap/plane_estimation.hpp"
#include "rowmap/tracking.hpp"

namespace rowmap {

/// World frame: x along the row, z up, y from the camera path toward the
/// observed corn plane. The ground is z = 0; stalk bases sit on the line
/// y = row_width / 2, z = 0.
struct FieldSpec {
  int stalk_count = 40;
  double mean_spacing = 0.2;     // meters between consecutive stalks
  double spacing_jitter = 0.02;  // stddev of per-stalk placement noise
  double row_width = 0.70;       // corridor width; the corn plane is at y = row_width / 2
  double stalk_height = 0.6;     // visible stalk portion
  double stalk_width = 0.03;
  double weed_outlier_rate = 0.0;  // fraction of ground points lifted off the plane
};

struct CameraSpec {
  CameraIntrinsics intrinsics{600.0, 600.0, 320.0, 240.0};
  RigidTransform extrinsic;  // camera from rig
  int width = 640;
  int height = 480;
};

enum class OdometryFrame { Side, Back };

struct RigSpec {
  CameraSpec front;
  CameraSpec side;
  CameraSpec back;
  double frame_rate = 30.0;
  /// Frame the logged odometry is expressed in; consumers convert via the
  /// extrinsics when it is not the side camera.
  OdometryFrame odometry_frame = OdometryFrame::Side;

  /// Forward-driving rig: side camera faces the row (+y), front camera faces
  /// along it (+x), back camera looks down and backward at the ground.
  static RigSpec standard();
};

struct WobbleSpec {
  double lateral_amp = 0.0;  // meters
  double yaw_amp = 0.0;      // radians
  double period = 2.0;       // meters of travel per cycle
};

struct TrajectorySpec {
  double length = 3.0;        // meters of travel
  double speed = 0.3;         // meters per second
  double start_x = -0.15;     // first pose, relative to stalk 0
  double camera_height = 0.25;
  WobbleSpec wobble;
};

/// Observation corruption. Everything defaults to zero so a default run is
/// exactly consistent with the truth fields; realistic() is the noisy regime
/// the benchmark baselines are compared under.
struct NoiseSpec {
  double pixel_sigma = 0.0;
  double match_outlier_rate = 0.0;   // off-plane contaminants among matches
  double depth_sigma = 0.0;          // along-ray noise on 3D samples
  double detect_dropout = 0.0;
  double false_positive_rate = 0.0;  // expected spurious boxes per frame
  double odom_rot_sigma = 0.0;       // radians per step
  double odom_trans_sigma = 0.0;     // meters per step
  double vp_sigma = 0.0;             // white pixel noise on the vanishing point
  double vp_bias_px = 0.0;           // scene-correlated vanishing-point bias amplitude
  double flow_sigma = 0.0;           // pixels per step on displacements
  double box_outlier_rate = 0.0;     // non-stalk returns among in-box depth samples
  double front_odom_factor = 8.0;    // sigma multiplier for the front-view stream
  double side_odom_factor = 12.0;    // sigma multiplier for the side-view stream

  static NoiseSpec realistic();
};

struct SamplingSpec {
  int matches_per_frame = 40;
  int ground_grid_x = 20;
  int ground_grid_y = 8;
  int box_points_per_detection = 20;
  int redetect_every = 30;  // flow-baseline re-detection period
};

struct SimSpec {
  FieldSpec field;
  RigSpec rig = RigSpec::standard();
  TrajectorySpec trajectory;
  NoiseSpec noise;
  SamplingSpec sampling;
};

struct GroundTruth {
  std::vector<Eigen::Vector3d> stalk_positions;  // bases, ascending x
  std::vector<double> neighbor_gaps;             // gaps[i] = x[i+1] - x[i]
  Plane ground_plane;                            // world
  Plane corn_plane;                              // world
  std::vector<RigidTransform> trajectory;        // side-camera poses, camera to world
};

struct VanishingPointObs {
  Pixel px;
  double slope_near = 0.0;  // image slope dv/du of the corn line on the side-camera side
  double slope_far = 0.0;   // and of the opposite row
};

struct FrameTruth {
  RigidTransform side_pose_world;
  Plane corn_plane_cam;    // side-camera frame
  Plane ground_plane_cam;  // front-camera frame
  std::vector<int> stalk_ids;  // per detection; -1 for false positives
};

struct FrameBundle {
  int frame = 0;
  RigidTransform odometry;        // step to the next frame, base noise profile
  RigidTransform odometry_front;  // same step, front-view noise profile
  RigidTransform odometry_side;   // same step, side-view noise profile
  std::vector<Detection> detections;
  std::vector<FeatureMatch> matches;  // this frame to the next
  std::vector<Eigen::Vector2d> displacements;  // for the flow baseline
  std::vector<Eigen::Vector3d> ground_points;  // front-camera frame
  std::vector<Eigen::Vector3d> box_points;     // side-camera frame, inside detections
  VanishingPointObs vp;
  FrameTruth truth;
};

struct ObservationLog {
  int format_version = 1;
  SimSpec specs;
  std::uint64_t seed = 0;
  GroundTruth scene;
  std::vector<FrameBundle> frames;
};

/// Stalk placement and the two scene planes. The returned trajectory is
/// empty; generate_trajectory fills it.
GroundTruth generate_scene(const FieldSpec& field, std::uint64_t seed);

/// Side-camera poses at the rig frame rate, driving +x at constant speed with
/// a bounded sinusoidal lateral/yaw wobble. The seed is accepted for
/// interface stability; the truth trajectory itself is deterministic.
std::vector<RigidTransform> generate_trajectory(const TrajectorySpec& trajectory,
                                                const RigSpec& rig, std::uint64_t seed);

/// All observations for one pose index. Deterministic in (scene, spec, seed,
/// pose_idx); frames can be rendered independently and in any order.
/// Throws IndexOutOfRange for a pose index outside the trajectory.
FrameBundle render_frame(const GroundTruth& scene, int pose_idx, const SimSpec& spec,
                         std::uint64_t seed);

/// Full run: scene, trajectory, every frame.
ObservationLog simulate(const SimSpec& spec, std::uint64_t seed);

/// JSON Lines round-trip: one header object, then one FrameBundle per line.
/// write_log omits the header timestamp when with_timestamp is false so runs
/// can be compared byte for byte. read_log validates the schema and reports
/// offending line numbers.
void write_log(const ObservationLog& log, const std::string& path, bool with_timestamp = true);
ObservationLog read_log(const std::string& path);

}  // namespace rowmap
