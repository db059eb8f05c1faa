#pragma once

#include <map>
#include <vector>

#include <Eigen/Core>

#include "rowmap/geometry.hpp"
#include "rowmap/tracking.hpp"

namespace rowmap {

struct StalkObservation {
  int track_id = 0;
  int frame = 0;
  Eigen::Vector3d world_point = Eigen::Vector3d::Zero();
};

struct StalkLandmark {
  int id = 0;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  int support = 0;
  int rejected = 0;
  std::vector<int> track_ids;  // tracks merged into this landmark, ascending
};

struct SemanticMap {
  std::vector<StalkLandmark> landmarks;
  Plane ground;  // world frame
  Plane corn;    // world frame
  std::vector<RigidTransform> trajectory;  // side-camera poses, camera to world
};

/// World point of a detection: the ray through the box centroid intersected
/// with the corn plane (camera frame), lifted by the camera pose.
Eigen::Vector3d localize_centroid(const BBox& box, const CameraIntrinsics& K,
                                  const Plane& corn_cam, const RigidTransform& cam_pose_world);
Eigen::Vector3d localize_pixel(const Pixel& px, const CameraIntrinsics& K, const Plane& corn_cam,
                               const RigidTransform& cam_pose_world);

struct FinalizeParams {
  int min_support = 5;
  double mad_k = 3.0;
  double merge_radius = 0.10;  // meters
};

/// Accumulates per-track world points plus per-frame plane estimates, then
/// reduces them to a semantic map: per-track robust means (median-distance
/// MAD gate), minimum-support filtering, and support-weighted merging of
/// landmarks closer than the merge radius. Finalization depends only on the
/// accumulated multiset, not on insertion order.
class MapBuilder {
 public:
  void accumulate(const StalkObservation& obs);
  void add_frame_planes(const Plane& ground_world, const Plane& corn_world);
  void add_pose(const RigidTransform& cam_pose_world);

  SemanticMap finalize(const FinalizeParams& params = FinalizeParams{}) const;

  bool empty() const { return observations_.empty(); }

 private:
  std::map<int, std::vector<StalkObservation>> observations_;
  std::vector<Plane> ground_planes_;
  std::vector<Plane> corn_planes_;
  std::vector<RigidTransform> trajectory_;
};

}  // namespace rowmap
