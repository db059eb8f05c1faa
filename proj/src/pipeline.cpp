#include "rowmap/pipeline.hpp"

#include <cmath>
#include <optional>

#include "rowmap/rng.hpp"

namespace rowmap {

namespace {

/// Logged odometry converted to a side-camera step, regardless of the frame
/// it was recorded in.
RigidTransform side_step(const RigidTransform& logged, const RigSpec& rig) {
  if (rig.odometry_frame == OdometryFrame::Side) return logged;
  const RigidTransform back_from_side = compose(rig.back.extrinsic, rig.side.extrinsic.inverse());
  const RigidTransform side_from_back = back_from_side.inverse();
  return compose(side_from_back, compose(logged, back_from_side));
}

const RigidTransform& pick_odometry(const FrameBundle& frame, OdomProfile profile) {
  switch (profile) {
    case OdomProfile::Front: return frame.odometry_front;
    case OdomProfile::Side: return frame.odometry_side;
    case OdomProfile::Base: break;
  }
  return frame.odometry;
}

/// Ground plane (oriented toward the camera) and row direction from the
/// front-camera depth samples.
struct GroundFrame {
  Plane plane;                 // front-camera frame, offset >= 0
  Eigen::Vector3d row_dir;     // unit, pointing away from the camera (+z-ish)
};

std::optional<GroundFrame> fit_ground(const std::vector<Eigen::Vector3d>& points,
                                      const GroundFitParams& params, std::uint64_t seed) {
  if (points.size() < 3) return std::nullopt;
  const std::vector<Eigen::Vector3d> sparse = downsample_uniform(points, params.cell);
  PlaneFit fit;
  try {
    fit = ransac_plane_fit(sparse, params.threshold, params.iterations, seed);
  } catch (const Error&) {
    return std::nullopt;
  }
  GroundFrame out;
  out.plane = fit.plane;
  if (out.plane.offset < 0.0) {
    // Keep the camera on the positive side so plane distances read as heights.
    out.plane.normal = -out.plane.normal;
    out.plane.offset = -out.plane.offset;
  }
  std::vector<Eigen::Vector3d> inliers;
  inliers.reserve(fit.inlier_indices.size());
  for (int idx : fit.inlier_indices) inliers.push_back(sparse[idx]);
  PcaAxes axes;
  try {
    axes = pca_axes(inliers);
  } catch (const Error&) {
    return std::nullopt;
  }
  if (axes.eigenvalues[1] <= 0.0 ||
      axes.eigenvalues[0] < params.min_axis_ratio * axes.eigenvalues[1]) {
    return std::nullopt;
  }
  out.row_dir = axes.axes[0];
  if (out.row_dir.z() < 0.0) out.row_dir = -out.row_dir;
  return out;
}

}  // namespace

PipelineResult run_pipeline(const ObservationLog& log, const RunConfig& config) {
  if (log.scene.trajectory.empty() || log.frames.empty()) {
    throw Error(ErrorCode::DegenerateInput, "log has no frames");
  }
  const RigSpec& rig = log.specs.rig;
  const CameraIntrinsics& side_K = rig.side.intrinsics;
  const CameraIntrinsics& front_K = rig.front.intrinsics;
  const RigidTransform side_from_front =
      compose(rig.side.extrinsic, rig.front.extrinsic.inverse());

  PipelineResult result;
  result.frames_total = static_cast<int>(log.frames.size());
  result.poses.reserve(log.frames.size());

  SortTracker sort_tracker(config.sort);
  FlowTracker flow_tracker(config.flow);
  MapBuilder builder;

  // Dead reckoning is anchored at the first true pose; everything after it
  // comes from composing the logged odometry steps.
  RigidTransform pose = log.scene.trajectory.front();

  for (std::size_t i = 0; i < log.frames.size(); ++i) {
    const FrameBundle& frame = log.frames[i];
    result.poses.push_back(pose);
    builder.add_pose(pose);

    // --- Track ----------------------------------------------------------
    FrameTracks tracks;
    tracks.frame = frame.frame;
    if (config.tracker == TrackerKind::Sort) {
      for (const TrackedBox& box : sort_tracker.step(frame.detections)) {
        // The filter state smooths the box for association; the measurement
        // itself is what gets localized, so report the detection's centroid.
        const Pixel centroid = box.detection_index >= 0
                                   ? frame.detections[box.detection_index].bbox.centroid()
                                   : box.bbox.centroid();
        tracks.items.push_back(TrackedItem{box.id, centroid, box.detection_index});
      }
    } else {
      const bool reinit = frame.frame % std::max(1, config.flow.redetect_every) == 0;
      std::optional<std::vector<Detection>> detections;
      if (reinit) detections = frame.detections;
      for (const TrackedCentroid& c : flow_tracker.step(frame.displacements, detections)) {
        tracks.items.push_back(
            TrackedItem{c.id, c.centroid, reinit ? c.origin_detection : -1});
      }
    }

    // --- Corn plane for this frame (side-camera coordinates) -------------
    std::optional<Plane> corn_side;
    std::optional<GroundFrame> ground =
        fit_ground(frame.ground_points, config.ground, Rng::derive(config.seed, 2 * i));
    if (ground) {
      try {
        switch (config.plane_source) {
          case PlaneSource::Corridor: {
            const double du = -config.corridor_line_offset_px;
            const Pixel line_px{frame.vp.px.u + du, frame.vp.px.v + du * frame.vp.slope_near};
            const CornPlaneEstimate est =
                corridor_plane(frame.vp.px, line_px, front_K, ground->plane);
            corn_side = transform_plane(side_from_front, est.plane);
            break;
          }
          case PlaneSource::SfmDistance: {
            if (i + 1 >= log.frames.size()) break;  // no forward matches
            const Eigen::Vector3d normal_front =
                corn_plane_normal(ground->plane.normal, ground->row_dir);
            const Eigen::Vector3d normal_side = side_from_front.rotation * normal_front;
            PlaneDistanceParams params = config.plane_distance;
            params.seed = Rng::derive(config.seed, 2 * i + 1);
            const RigidTransform step = side_step(pick_odometry(frame, config.odometry), rig);
            corn_side = estimate_plane_distance(frame.matches, side_K, step, normal_side,
                                                params)
                            .plane;
            break;
          }
          case PlaneSource::DepthRansac: {
            // Free 3-dof plane fit to the in-box depth samples; unlike the
            // SfM path it takes no orientation hint from the ground.
            const PlaneFit fit =
                ransac_plane_fit(frame.box_points, config.sideview.inlier_m,
                                 config.sideview.iterations, Rng::derive(config.seed, 2 * i + 1));
            corn_side = fit.plane;
            break;
          }
        }
      } catch (const Error&) {
        corn_side.reset();  // estimator gave up on this frame
      }
    }

    // --- Localize and accumulate ----------------------------------------
    if (corn_side) {
      ++result.frames_with_plane;
      // Flip toward the camera if needed: the camera must be on the positive
      // side of the corn plane for ray intersections to land in front of it.
      if (corn_side->offset < 0.0) {
        corn_side->normal = -corn_side->normal;
        corn_side->offset = -corn_side->offset;
      }
      const RigidTransform front_pose = compose(pose, side_from_front);
      builder.add_frame_planes(transform_plane(front_pose, ground->plane),
                               transform_plane(pose, *corn_side));
      for (const TrackedItem& item : tracks.items) {
        try {
          const Eigen::Vector3d world =
              localize_pixel(item.pixel, side_K, *corn_side, pose);
          builder.accumulate(StalkObservation{item.track_id, frame.frame, world});
        } catch (const Error&) {
          // Ray parallel to or pointing away from the plane: skip this item.
        }
      }
    }
    result.tracks.push_back(std::move(tracks));

    // --- Advance the pose with this frame's odometry ---------------------
    if (i + 1 < log.frames.size()) {
      const RigidTransform step = side_step(pick_odometry(frame, config.odometry), rig);
      pose = compose(pose, step.inverse());
    }
  }

  result.map = builder.empty() ? SemanticMap{} : builder.finalize(config.finalize);
  if (builder.empty()) {
    result.map.trajectory = result.poses;
  }
  return result;
}

}  // namespace rowmap
