#include "rowmap/simulator.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Geometry>

#include "rowmap/rng.hpp"

namespace rowmap {

namespace {

// Per-frame RNG sub-stream tags; every observation family draws from its own
// stream so frames are renderable independently and in any order.
enum Stream : std::uint64_t {
  kDetections = 1,
  kMatches = 2,
  kGround = 3,
  kBoxPoints = 4,
  kVanishing = 5,
  kOdometry = 6,
  kFlow = 7,
  kOdometryFront = 8,
  kOdometrySide = 9,
};

Rng frame_rng(std::uint64_t seed, int frame, Stream stream) {
  return Rng(Rng::derive(Rng::derive(seed, static_cast<std::uint64_t>(frame)), stream));
}

Eigen::Matrix3d from_columns(const Eigen::Vector3d& x, const Eigen::Vector3d& y,
                             const Eigen::Vector3d& z) {
  Eigen::Matrix3d R;
  R.col(0) = x;
  R.col(1) = y;
  R.col(2) = z;
  return R;
}

RigidTransform world_pose(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& position) {
  return RigidTransform{rotation, position};
}

/// camera-from-rig extrinsic given both world poses at a canonical rig pose.
RigidTransform extrinsic_from_world(const RigidTransform& cam_world,
                                    const RigidTransform& rig_world) {
  return compose(cam_world.inverse(), rig_world);
}

bool inside_image(const CameraSpec& cam, const Pixel& px) {
  return px.u >= 0.0 && px.u <= cam.width - 1.0 && px.v >= 0.0 && px.v <= cam.height - 1.0;
}

double row_y(const FieldSpec& field) { return 0.5 * field.row_width; }

struct DetectionSet {
  std::vector<Detection> detections;
  std::vector<int> stalk_ids;
};

/// Side-camera boxes for one pose. Shared by frame rendering and by the
/// displacement stream, which must reconstruct the boxes of an earlier
/// re-detection frame.
DetectionSet detections_for_frame(const GroundTruth& scene, int pose_idx, const SimSpec& spec,
                                  std::uint64_t seed) {
  const CameraSpec& cam = spec.rig.side;
  const RigidTransform to_cam =
      compose(cam.extrinsic, scene.trajectory[pose_idx].inverse());
  Rng rng = frame_rng(seed, pose_idx, kDetections);

  DetectionSet out;
  for (std::size_t s = 0; s < scene.stalk_positions.size(); ++s) {
    const Eigen::Vector3d base = scene.stalk_positions[s];
    const Eigen::Vector3d top = base + Eigen::Vector3d(0.0, 0.0, spec.field.stalk_height);
    const Eigen::Vector3d base_cam = to_cam.apply(base);
    const Eigen::Vector3d top_cam = to_cam.apply(top);
    if (base_cam.z() <= 0.05 || top_cam.z() <= 0.05) continue;
    const Pixel pb = project(cam.intrinsics, base_cam);
    const Pixel pt = project(cam.intrinsics, top_cam);
    const double half_width = cam.intrinsics.fx * 0.5 * spec.field.stalk_width / base_cam.z();
    const double u_min = std::min(pb.u, pt.u) - half_width;
    const double u_max = std::max(pb.u, pt.u) + half_width;
    // Emit only fully horizontally visible stalks; detectors are unreliable
    // on boxes cut by the image border, and partial boxes would bias the
    // centroid off the stalk axis.
    if (u_min < 0.0 || u_max > cam.width - 1.0) continue;
    double v_min = std::clamp(std::min(pb.v, pt.v), 0.0, cam.height - 1.0);
    double v_max = std::clamp(std::max(pb.v, pt.v), 0.0, cam.height - 1.0);
    if (v_max - v_min < 5.0) continue;

    if (rng.bernoulli(spec.noise.detect_dropout)) continue;
    Detection det;
    det.frame = pose_idx;
    det.bbox.x_min = std::clamp(u_min + rng.normal(0.0, spec.noise.pixel_sigma), 0.0,
                                cam.width - 1.0);
    det.bbox.y_min = std::clamp(v_min + rng.normal(0.0, spec.noise.pixel_sigma), 0.0,
                                cam.height - 1.0);
    det.bbox.x_max = std::clamp(u_max + rng.normal(0.0, spec.noise.pixel_sigma), 0.0,
                                cam.width - 1.0);
    det.bbox.y_max = std::clamp(v_max + rng.normal(0.0, spec.noise.pixel_sigma), 0.0,
                                cam.height - 1.0);
    det.score = 1.0 - 0.1 * rng.uniform();
    if (det.bbox.width() < 1.0 || det.bbox.height() < 1.0) continue;
    out.detections.push_back(det);
    out.stalk_ids.push_back(static_cast<int>(s));
  }

  const int false_positives = rng.poisson(spec.noise.false_positive_rate);
  for (int f = 0; f < false_positives; ++f) {
    const double u_c = rng.uniform(20.0, cam.width - 20.0);
    const double w = rng.uniform(30.0, 70.0);
    const double v_lo = rng.uniform(0.0, cam.height / 2.0);
    const double v_hi = std::min(v_lo + rng.uniform(cam.height / 4.0, cam.height / 2.0),
                                 cam.height - 1.0);
    Detection det;
    det.frame = pose_idx;
    det.bbox = BBox{std::max(u_c - 0.5 * w, 0.0), v_lo,
                    std::min(u_c + 0.5 * w, cam.width - 1.0), v_hi};
    det.score = rng.uniform(0.5, 0.9);
    if (det.bbox.width() < 1.0 || det.bbox.height() < 5.0) continue;
    out.detections.push_back(det);
    out.stalk_ids.push_back(-1);
  }
  return out;
}

}  // namespace

RigSpec RigSpec::standard() {
  RigSpec rig;
  // Rig frame coincides with the side camera: x forward along the row,
  // y down, z toward the corn plane.
  const RigidTransform side_world = world_pose(
      from_columns({1, 0, 0}, {0, 0, -1}, {0, 1, 0}), {0, 0, 0});
  const RigidTransform front_world = world_pose(
      from_columns({0, -1, 0}, {0, 0, -1}, {1, 0, 0}), {0.15, 0, 0});
  const double s = std::sqrt(0.5);
  const RigidTransform back_world = world_pose(
      from_columns({0, -1, 0}, {-s, 0, s}, {-s, 0, -s}), {-0.2, 0, -0.1});
  rig.side.extrinsic = extrinsic_from_world(side_world, side_world);
  rig.front.extrinsic = extrinsic_from_world(front_world, side_world);
  rig.back.extrinsic = extrinsic_from_world(back_world, side_world);
  return rig;
}

NoiseSpec NoiseSpec::realistic() {
  NoiseSpec noise;
  noise.pixel_sigma = 1.0;
  noise.match_outlier_rate = 0.2;
  noise.depth_sigma = 0.005;
  noise.detect_dropout = 0.1;
  noise.false_positive_rate = 0.05;
  noise.odom_rot_sigma = 5e-5;
  noise.odom_trans_sigma = 5e-5;
  noise.vp_sigma = 3.0;
  noise.vp_bias_px = 12.0;
  noise.flow_sigma = 0.8;
  // Side-view depth inside a stalk box is mostly foliage and ground seen
  // through gaps; the actual stalk is a minority of the returns.
  noise.box_outlier_rate = 0.7;
  return noise;
}

GroundTruth generate_scene(const FieldSpec& field, std::uint64_t seed) {
  if (field.stalk_count < 2) {
    throw Error(ErrorCode::DegenerateInput, "need at least 2 stalks");
  }
  Rng rng(Rng::derive(seed, 0xf1e1dULL));
  GroundTruth scene;
  const double y = row_y(field);
  scene.stalk_positions.reserve(field.stalk_count);
  for (int i = 0; i < field.stalk_count; ++i) {
    const double x = i * field.mean_spacing + rng.normal(0.0, field.spacing_jitter);
    scene.stalk_positions.emplace_back(x, y, 0.0);
  }
  std::sort(scene.stalk_positions.begin(), scene.stalk_positions.end(),
            [](const Eigen::Vector3d& a, const Eigen::Vector3d& b) { return a.x() < b.x(); });
  for (std::size_t i = 0; i + 1 < scene.stalk_positions.size(); ++i) {
    scene.neighbor_gaps.push_back(scene.stalk_positions[i + 1].x() -
                                  scene.stalk_positions[i].x());
  }
  scene.ground_plane = Plane{{0.0, 0.0, 1.0}, 0.0};
  // Normal points from the corn plane back toward the camera path.
  scene.corn_plane = Plane{{0.0, -1.0, 0.0}, y};
  return scene;
}

std::vector<RigidTransform> generate_trajectory(const TrajectorySpec& trajectory,
                                                const RigSpec& rig, std::uint64_t /*seed*/) {
  if (trajectory.speed <= 0.0 || trajectory.length <= 0.0 || rig.frame_rate <= 0.0) {
    throw Error(ErrorCode::DegenerateInput, "trajectory needs positive length, speed, rate");
  }
  const double step = trajectory.speed / rig.frame_rate;
  const int poses = std::max(2, static_cast<int>(std::llround(trajectory.length / step)));
  const Eigen::Matrix3d base = from_columns({1, 0, 0}, {0, 0, -1}, {0, 1, 0});

  std::vector<RigidTransform> out;
  out.reserve(poses);
  for (int i = 0; i < poses; ++i) {
    const double travel = i * step;
    const double phase = 2.0 * M_PI * travel / trajectory.wobble.period;
    const double yaw = trajectory.wobble.yaw_amp * std::sin(phase + 0.5 * M_PI);
    RigidTransform pose;
    pose.rotation = Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix() * base;
    pose.translation = Eigen::Vector3d(trajectory.start_x + travel,
                                       trajectory.wobble.lateral_amp * std::sin(phase),
                                       trajectory.camera_height);
    out.push_back(pose);
  }
  return out;
}

namespace {

RigidTransform noisy_step(const RigidTransform& step, Rng& rng, double rot_sigma,
                          double trans_sigma) {
  Eigen::Vector3d axis(rng.normal(), rng.normal(), rng.normal());
  const double norm = axis.norm();
  axis = norm > 1e-12 ? Eigen::Vector3d(axis / norm) : Eigen::Vector3d::UnitZ();
  const double angle = rng.normal(0.0, rot_sigma);
  RigidTransform noise;
  noise.rotation = Eigen::AngleAxisd(angle, axis).toRotationMatrix();
  noise.translation = Eigen::Vector3d(rng.normal(0.0, trans_sigma), rng.normal(0.0, trans_sigma),
                                      rng.normal(0.0, trans_sigma));
  return compose(noise, step);
}

RigidTransform to_odometry_frame(const RigidTransform& side_step, const RigSpec& rig) {
  if (rig.odometry_frame == OdometryFrame::Side) return side_step;
  // Conjugate the side-camera step into the back-camera frame.
  const RigidTransform back_from_side = compose(rig.back.extrinsic, rig.side.extrinsic.inverse());
  return compose(back_from_side, compose(side_step, back_from_side.inverse()));
}

}  // namespace

FrameBundle render_frame(const GroundTruth& scene, int pose_idx, const SimSpec& spec,
                         std::uint64_t seed) {
  const int pose_count = static_cast<int>(scene.trajectory.size());
  if (pose_idx < 0 || pose_idx >= pose_count) {
    throw Error(ErrorCode::IndexOutOfRange,
                "pose " + std::to_string(pose_idx) + " of " + std::to_string(pose_count));
  }
  const FieldSpec& field = spec.field;
  const double y = row_y(field);
  const RigidTransform& side_pose = scene.trajectory[pose_idx];
  const RigidTransform side_inv = side_pose.inverse();
  const RigidTransform front_pose = compose(side_pose, spec.rig.front.extrinsic.inverse());
  const RigidTransform front_inv = front_pose.inverse();

  FrameBundle bundle;
  bundle.frame = pose_idx;

  // --- Detections -------------------------------------------------------
  DetectionSet det_set = detections_for_frame(scene, pose_idx, spec, seed);
  bundle.detections = det_set.detections;

  // --- Feature matches to the next frame --------------------------------
  if (pose_idx + 1 < pose_count) {
    const RigidTransform next_inv = scene.trajectory[pose_idx + 1].inverse();
    Rng rng = frame_rng(seed, pose_idx, kMatches);
    const int target = spec.sampling.matches_per_frame;
    int attempts = 0;
    while (static_cast<int>(bundle.matches.size()) < target && attempts < 20 * target) {
      ++attempts;
      const Eigen::Vector3d& stalk =
          scene.stalk_positions[rng.uniform_index(scene.stalk_positions.size())];
      Eigen::Vector3d q(stalk.x() + rng.uniform(-field.stalk_width, field.stalk_width), y,
                        rng.uniform(0.05, field.stalk_height));
      if (rng.bernoulli(spec.noise.match_outlier_rate)) {
        // Off-plane contaminant (leaf or weed), still a consistent 3D point.
        const double side = rng.bernoulli(0.5) ? -1.0 : 1.0;
        q.y() += side * rng.uniform(0.08, 0.25);
      }
      const Eigen::Vector3d q1 = side_inv.apply(q);
      const Eigen::Vector3d q2 = next_inv.apply(q);
      if (q1.z() <= 0.05 || q2.z() <= 0.05) continue;
      Pixel px1 = project(spec.rig.side.intrinsics, q1);
      Pixel px2 = project(spec.rig.side.intrinsics, q2);
      if (!inside_image(spec.rig.side, px1) || !inside_image(spec.rig.side, px2)) continue;
      px1.u += rng.normal(0.0, spec.noise.pixel_sigma);
      px1.v += rng.normal(0.0, spec.noise.pixel_sigma);
      px2.u += rng.normal(0.0, spec.noise.pixel_sigma);
      px2.v += rng.normal(0.0, spec.noise.pixel_sigma);
      bundle.matches.push_back(FeatureMatch{px1, px2});
    }
  }

  // --- Ground points (front camera) --------------------------------------
  {
    Rng rng = frame_rng(seed, pose_idx, kGround);
    const double cam_x = side_pose.translation.x();
    const int nx = std::max(2, spec.sampling.ground_grid_x);
    const int ny = std::max(2, spec.sampling.ground_grid_y);
    const double y_half = y - 0.02;
    // Regular grid: symmetric sampling keeps the patch's principal axes
    // aligned with the row even before any averaging.
    for (int ix = 0; ix < nx; ++ix) {
      const double gx = cam_x + 0.4 + 2.0 * ix / (nx - 1.0);
      for (int iy = 0; iy < ny; ++iy) {
        const double gy = -y_half + 2.0 * y_half * iy / (ny - 1.0);
        double gz = 0.0;
        if (rng.bernoulli(field.weed_outlier_rate)) {
          gz = rng.uniform(0.03, 0.25);
        }
        const Eigen::Vector3d p_front = front_inv.apply(Eigen::Vector3d(gx, gy, gz));
        if (p_front.z() <= 0.05) continue;
        const Pixel px = project(spec.rig.front.intrinsics, p_front);
        if (!inside_image(spec.rig.front, px)) continue;
        Eigen::Vector3d noisy = p_front;
        if (spec.noise.depth_sigma > 0.0) {
          noisy += p_front.normalized() * rng.normal(0.0, spec.noise.depth_sigma);
        }
        bundle.ground_points.push_back(noisy);
      }
    }
  }

  // --- Depth samples inside detection boxes (side camera) ----------------
  {
    Rng rng = frame_rng(seed, pose_idx, kBoxPoints);
    const Plane ground_side = transform_plane(side_inv, scene.ground_plane);
    for (std::size_t d = 0; d < bundle.detections.size(); ++d) {
      const int stalk_id = det_set.stalk_ids[d];
      const BBox& box = bundle.detections[d].bbox;
      for (int k = 0; k < spec.sampling.box_points_per_detection; ++k) {
        Eigen::Vector3d p_side;
        if (stalk_id >= 0) {
          if (rng.bernoulli(spec.noise.box_outlier_rate)) {
            // Non-stalk return. Half the clutter is ground seen through gaps
            // in the foliage, the rest leaves hanging off the row plane
            // (mostly behind it, where the plant mass is).
            bool placed = false;
            if (rng.bernoulli(0.5)) {
              const Pixel px{rng.uniform(box.x_min, box.x_max),
                             rng.uniform(box.y_min, box.y_max)};
              try {
                const Eigen::Vector3d hit = intersect_ray_plane(
                    Eigen::Vector3d::Zero(), backproject_ray(spec.rig.side.intrinsics, px),
                    ground_side);
                if (hit.norm() < 8.0) {  // depth sensing range-caps
                  p_side = hit;
                  placed = true;
                }
              } catch (const Error&) {
                // Ray misses the ground; fall through to foliage.
              }
            }
            if (!placed) {
              const Eigen::Vector3d& stalk = scene.stalk_positions[stalk_id];
              const double side = rng.bernoulli(0.7) ? 1.0 : -1.0;
              const Eigen::Vector3d q(stalk.x() + rng.uniform(-0.10, 0.10),
                                      y + side * rng.uniform(0.08, 0.30),
                                      rng.uniform(0.05, field.stalk_height));
              p_side = side_inv.apply(q);
            }
          } else {
            const Eigen::Vector3d& stalk = scene.stalk_positions[stalk_id];
            const Eigen::Vector3d q(
                stalk.x() + rng.uniform(-0.5, 0.5) * field.stalk_width, y,
                rng.uniform(0.05, field.stalk_height));
            p_side = side_inv.apply(q);
          }
        } else {
          // Spurious box: clutter at an arbitrary depth behind the pixel.
          const Pixel px{rng.uniform(box.x_min, box.x_max), rng.uniform(box.y_min, box.y_max)};
          p_side = backproject_ray(spec.rig.side.intrinsics, px) * rng.uniform(0.2, 0.8);
        }
        if (spec.noise.depth_sigma > 0.0 && p_side.norm() > 1e-9) {
          p_side += p_side.normalized() * rng.normal(0.0, spec.noise.depth_sigma);
        }
        bundle.box_points.push_back(p_side);
      }
    }
  }

  // --- Vanishing point and corn-line slopes (front camera) ---------------
  {
    Rng rng = frame_rng(seed, pose_idx, kVanishing);
    const Eigen::Vector3d row_dir_front = front_inv.rotation * Eigen::Vector3d::UnitX();
    if (row_dir_front.z() > 1e-6) {
      bundle.vp.px = Pixel{spec.rig.front.intrinsics.fx * row_dir_front.x() / row_dir_front.z() +
                               spec.rig.front.intrinsics.cx,
                           spec.rig.front.intrinsics.fy * row_dir_front.y() / row_dir_front.z() +
                               spec.rig.front.intrinsics.cy};
    }
    const double cam_x = side_pose.translation.x();
    auto line_slope = [&](double line_y) {
      const Pixel a = project(spec.rig.front.intrinsics,
                              front_inv.apply(Eigen::Vector3d(cam_x + 1.0, line_y, 0.0)));
      const Pixel b = project(spec.rig.front.intrinsics,
                              front_inv.apply(Eigen::Vector3d(cam_x + 2.0, line_y, 0.0)));
      const double du = b.u - a.u;
      if (std::abs(du) < 1e-9) return 1e9;
      return (b.v - a.v) / du;
    };
    bundle.vp.slope_near = line_slope(y);
    bundle.vp.slope_far = line_slope(-y);
    if (spec.noise.vp_bias_px > 0.0) {
      // Scene-driven error: the canopy silhouette that line fitting latches
      // onto changes slowly along the row, so the bias is a smooth function
      // of position, not white noise.
      Rng phase_rng(Rng::derive(seed, 0xb1a5ULL));
      const double phase_u = 2.0 * M_PI * phase_rng.uniform();
      const double phase_v = 2.0 * M_PI * phase_rng.uniform();
      const double phase_near = 2.0 * M_PI * phase_rng.uniform();
      const double phase_far = 2.0 * M_PI * phase_rng.uniform();
      const double along = 2.0 * M_PI * cam_x / 1.3;  // 1.3 m canopy wavelength
      bundle.vp.px.u += spec.noise.vp_bias_px * std::sin(along + phase_u);
      bundle.vp.px.v += spec.noise.vp_bias_px * std::sin(along + phase_v);
      bundle.vp.slope_near += spec.noise.vp_bias_px / 200.0 * std::sin(along + phase_near);
      bundle.vp.slope_far += spec.noise.vp_bias_px / 200.0 * std::sin(along + phase_far);
    }
    bundle.vp.px.u += rng.normal(0.0, spec.noise.vp_sigma);
    bundle.vp.px.v += rng.normal(0.0, spec.noise.vp_sigma);
    bundle.vp.slope_near += rng.normal(0.0, spec.noise.vp_sigma / 200.0);
    bundle.vp.slope_far += rng.normal(0.0, spec.noise.vp_sigma / 200.0);
  }

  // --- Odometry to the next frame ----------------------------------------
  if (pose_idx + 1 < pose_count) {
    const RigidTransform true_step =
        compose(scene.trajectory[pose_idx + 1].inverse(), side_pose);
    Rng rng_base = frame_rng(seed, pose_idx, kOdometry);
    Rng rng_front = frame_rng(seed, pose_idx, kOdometryFront);
    Rng rng_side = frame_rng(seed, pose_idx, kOdometrySide);
    const NoiseSpec& noise = spec.noise;
    bundle.odometry = to_odometry_frame(
        noisy_step(true_step, rng_base, noise.odom_rot_sigma, noise.odom_trans_sigma), spec.rig);
    bundle.odometry_front = to_odometry_frame(
        noisy_step(true_step, rng_front, noise.front_odom_factor * noise.odom_rot_sigma,
                   noise.front_odom_factor * noise.odom_trans_sigma),
        spec.rig);
    bundle.odometry_side = to_odometry_frame(
        noisy_step(true_step, rng_side, noise.side_odom_factor * noise.odom_rot_sigma,
                   noise.side_odom_factor * noise.odom_trans_sigma),
        spec.rig);
  }

  // --- Displacements for the flow baseline --------------------------------
  {
    const int period = std::max(1, spec.sampling.redetect_every);
    const int redetect = (pose_idx / period) * period;
    if (pose_idx != redetect) {
      Rng rng = frame_rng(seed, pose_idx, kFlow);
      const DetectionSet tracked = detections_for_frame(scene, redetect, spec, seed);
      const RigidTransform prev_inv = scene.trajectory[pose_idx - 1].inverse();
      for (std::size_t d = 0; d < tracked.detections.size(); ++d) {
        Eigen::Vector2d disp(rng.normal(0.0, spec.noise.flow_sigma),
                             rng.normal(0.0, spec.noise.flow_sigma));
        const int stalk_id = tracked.stalk_ids[d];
        if (stalk_id >= 0) {
          // The tracked patch sits on the stalk at roughly camera height.
          const Eigen::Vector3d ref(scene.stalk_positions[stalk_id].x(), y,
                                    scene.trajectory[redetect].translation.z());
          const Eigen::Vector3d now = side_inv.apply(ref);
          const Eigen::Vector3d prev = prev_inv.apply(ref);
          if (now.z() > 1e-6 && prev.z() > 1e-6) {
            const Pixel px_now = project(spec.rig.side.intrinsics, now);
            const Pixel px_prev = project(spec.rig.side.intrinsics, prev);
            disp.x() += px_now.u - px_prev.u;
            disp.y() += px_now.v - px_prev.v;
          }
        }
        bundle.displacements.push_back(disp);
      }
    }
  }

  // --- Truth --------------------------------------------------------------
  bundle.truth.side_pose_world = side_pose;
  bundle.truth.corn_plane_cam = transform_plane(side_inv, scene.corn_plane);
  bundle.truth.ground_plane_cam = transform_plane(front_inv, scene.ground_plane);
  bundle.truth.stalk_ids = det_set.stalk_ids;
  return bundle;
}

ObservationLog simulate(const SimSpec& spec, std::uint64_t seed) {
  ObservationLog log;
  log.specs = spec;
  log.seed = seed;
  log.scene = generate_scene(spec.field, seed);
  log.scene.trajectory = generate_trajectory(spec.trajectory, spec.rig, seed);
  const int poses = static_cast<int>(log.scene.trajectory.size());
  log.frames.reserve(poses);
  for (int i = 0; i < poses; ++i) {
    log.frames.push_back(render_frame(log.scene, i, spec, seed));
  }
  return log;
}

}  // namespace rowmap
