#include "rowmap/mapping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rowmap {

Eigen::Vector3d localize_pixel(const Pixel& px, const CameraIntrinsics& K, const Plane& corn_cam,
                               const RigidTransform& cam_pose_world) {
  const Eigen::Vector3d ray = backproject_ray(K, px);
  const Eigen::Vector3d point_cam =
      intersect_ray_plane(Eigen::Vector3d::Zero(), ray, corn_cam);
  return cam_pose_world.apply(point_cam);
}

Eigen::Vector3d localize_centroid(const BBox& box, const CameraIntrinsics& K,
                                  const Plane& corn_cam, const RigidTransform& cam_pose_world) {
  return localize_pixel(box.centroid(), K, corn_cam, cam_pose_world);
}

void MapBuilder::accumulate(const StalkObservation& obs) {
  observations_[obs.track_id].push_back(obs);
}

void MapBuilder::add_frame_planes(const Plane& ground_world, const Plane& corn_world) {
  ground_planes_.push_back(ground_world);
  corn_planes_.push_back(corn_world);
}

void MapBuilder::add_pose(const RigidTransform& cam_pose_world) {
  trajectory_.push_back(cam_pose_world);
}

namespace {

double median_of(std::vector<double> values) {
  const std::size_t n = values.size();
  std::sort(values.begin(), values.end());
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

Eigen::Vector3d componentwise_median(const std::vector<Eigen::Vector3d>& points) {
  Eigen::Vector3d med;
  for (int axis = 0; axis < 3; ++axis) {
    std::vector<double> comp(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) comp[i] = points[i](axis);
    med(axis) = median_of(std::move(comp));
  }
  return med;
}

/// Median plane over per-frame estimates, after flipping every estimate to
/// the orientation of the first one ((n, d) and (-n, -d) are the same plane).
Plane median_plane(const std::vector<Plane>& planes) {
  if (planes.empty()) return Plane{};
  const Eigen::Vector3d ref = planes.front().normal;
  std::vector<double> nx, ny, nz, offs;
  for (const Plane& p : planes) {
    const double sign = p.normal.dot(ref) < 0.0 ? -1.0 : 1.0;
    nx.push_back(sign * p.normal.x());
    ny.push_back(sign * p.normal.y());
    nz.push_back(sign * p.normal.z());
    offs.push_back(sign * p.offset);
  }
  Plane out;
  const Eigen::Vector3d n(median_of(std::move(nx)), median_of(std::move(ny)),
                          median_of(std::move(nz)));
  const double norm = n.norm();
  if (norm < 1e-12) return planes.front();
  out.normal = n / norm;
  // Rescale the offset with the normal so the plane stays put.
  out.offset = median_of(std::move(offs)) / norm;
  return out;
}

}  // namespace

SemanticMap MapBuilder::finalize(const FinalizeParams& params) const {
  if (observations_.empty()) {
    throw Error(ErrorCode::EmptyMap, "no observations accumulated");
  }

  std::vector<StalkLandmark> landmarks;
  for (const auto& [track_id, raw_obs] : observations_) {
    // Sort within the track so the reduction is insertion-order invariant.
    std::vector<StalkObservation> obs = raw_obs;
    std::sort(obs.begin(), obs.end(), [](const StalkObservation& a, const StalkObservation& b) {
      if (a.frame != b.frame) return a.frame < b.frame;
      return std::lexicographical_compare(a.world_point.data(), a.world_point.data() + 3,
                                          b.world_point.data(), b.world_point.data() + 3);
    });
    std::vector<Eigen::Vector3d> points;
    points.reserve(obs.size());
    for (const StalkObservation& o : obs) points.push_back(o.world_point);

    // MAD gate on distances to the componentwise median.
    const Eigen::Vector3d med = componentwise_median(points);
    std::vector<double> deviations(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) deviations[i] = (points[i] - med).norm();
    const double mad = median_of(deviations);
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    int kept = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (deviations[i] > params.mad_k * mad) continue;
      sum += points[i];
      ++kept;
    }
    if (kept < params.min_support) continue;

    StalkLandmark landmark;
    landmark.id = track_id;
    landmark.position = sum / static_cast<double>(kept);
    landmark.support = kept;
    landmark.rejected = static_cast<int>(points.size()) - kept;
    landmark.track_ids = {track_id};
    landmarks.push_back(std::move(landmark));
  }

  // Merge landmarks that land within the merge radius: repeatedly fuse the
  // closest pair (support-weighted) so the result is independent of landmark
  // enumeration order.
  while (landmarks.size() >= 2) {
    double best_dist = std::numeric_limits<double>::infinity();
    std::size_t best_a = 0, best_b = 0;
    for (std::size_t a = 0; a < landmarks.size(); ++a) {
      for (std::size_t b = a + 1; b < landmarks.size(); ++b) {
        const double dist = (landmarks[a].position - landmarks[b].position).norm();
        if (dist < best_dist) {
          best_dist = dist;
          best_a = a;
          best_b = b;
        }
      }
    }
    if (best_dist > params.merge_radius) break;
    StalkLandmark& keep = landmarks[best_a];
    StalkLandmark& drop = landmarks[best_b];
    const double total = keep.support + drop.support;
    keep.position = (keep.support * keep.position + drop.support * drop.position) / total;
    keep.id = std::min(keep.id, drop.id);
    keep.support += drop.support;
    keep.rejected += drop.rejected;
    keep.track_ids.insert(keep.track_ids.end(), drop.track_ids.begin(), drop.track_ids.end());
    std::sort(keep.track_ids.begin(), keep.track_ids.end());
    landmarks.erase(landmarks.begin() + static_cast<std::ptrdiff_t>(best_b));
  }
  std::sort(landmarks.begin(), landmarks.end(),
            [](const StalkLandmark& a, const StalkLandmark& b) { return a.id < b.id; });

  SemanticMap map;
  map.landmarks = std::move(landmarks);
  map.ground = median_plane(ground_planes_);
  map.corn = median_plane(corn_planes_);
  map.trajectory = trajectory_;
  return map;
}

}  // namespace rowmap
