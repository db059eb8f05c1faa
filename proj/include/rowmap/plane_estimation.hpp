#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "rowmap/geometry.hpp"

namespace rowmap {

/// A pixel correspondence between two consecutive side-camera frames.
struct FeatureMatch {
  Pixel px1;  // first frame
  Pixel px2;  // second frame
};

struct PlaneFit {
  Plane plane;
  std::vector<int> inlier_indices;  // ascending
  double rms_residual = 0.0;        // meters, over inliers
};

/// Robust plane fit: best 3-point hypothesis by inlier count (ties broken by
/// the lowest hypothesis index), then least-squares refit (smallest PCA axis)
/// iterated with inlier reselection until the inlier set is stable.
/// Throws DegenerateInput (< 3 points or no non-collinear triple sampled) and
/// NoConsensus (best hypothesis supports < 3 inliers).
PlaneFit ransac_plane_fit(const std::vector<Eigen::Vector3d>& points, double threshold,
                          int iterations, std::uint64_t seed);

/// Voxel-grid downsampling: at most one point (the centroid of the cell's
/// members) per cubic cell, emitted in first-seen cell order.
std::vector<Eigen::Vector3d> downsample_uniform(const std::vector<Eigen::Vector3d>& points,
                                                double cell);

/// Principal axes of a point cloud, ordered by descending eigenvalue. Axis
/// signs are canonicalized so the largest-magnitude component of each axis is
/// positive; callers reorient them against scene geometry as needed.
struct PcaAxes {
  std::array<Eigen::Vector3d, 3> axes;
  std::array<double, 3> eigenvalues;  // descending, clamped at zero
};
PcaAxes pca_axes(const std::vector<Eigen::Vector3d>& points);

/// Corn-plane normal from the ground normal and the row direction (their
/// cross product). Throws NearParallelInputs when |n_g . v_l| >= 0.5.
Eigen::Vector3d corn_plane_normal(const Eigen::Vector3d& ground_normal,
                                  const Eigen::Vector3d& row_direction);

struct CornPlaneEstimate {
  Plane plane;               // in the first (or only) camera frame
  int inlier_count = 0;
  double rms_residual = 0.0;  // pixels for image-based estimators, meters for sideview
};

struct PlaneDistanceParams {
  double min_translation = 0.005;  // meters; below this the solve is ill-conditioned
  double inlier_px = 2.0;
  int iterations = 200;
  std::uint64_t seed = 0;
};

/// Distance of the corn plane from matched on-plane pixels under known camera
/// motion T (frame 1 to frame 2) and known plane normal (first frame). Each
/// match contributes two equations linear in the distance after clearing the
/// projective denominators; hypotheses are single-match solves ranked by
/// reprojected-pixel consensus, and the winner is refit by least squares over
/// the inlier equations. Estimates implying non-positive point depth are
/// rejected. Throws InsufficientMotion, BehindCamera, NoConsensus.
CornPlaneEstimate estimate_plane_distance(const std::vector<FeatureMatch>& matches,
                                          const CameraIntrinsics& K, const RigidTransform& T,
                                          const Eigen::Vector3d& plane_normal,
                                          const PlaneDistanceParams& params);

/// Corn plane from a single front-camera view: the vanishing point of the row
/// fixes the row direction, the ground plane fixes the normal via the cross
/// product, and the ray through a pixel on the corn line anchors the offset.
/// Throws NearParallelInputs plus the ray-plane intersection errors.
CornPlaneEstimate corridor_plane(const Pixel& vanishing_point, const Pixel& line_pixel,
                                 const CameraIntrinsics& K, const Plane& ground);

struct SideviewParams {
  double inlier_m = 0.02;
  int iterations = 200;
  std::uint64_t seed = 0;
};

/// Corn-plane offset from 3D candidate points (depth samples inside detection
/// boxes) with a known normal: single-point RANSAC hypotheses, inliers by
/// point-plane distance, final offset averaged over the inliers.
/// Throws NoConsensus on an empty point list.
CornPlaneEstimate sideview_plane_distance(const std::vector<Eigen::Vector3d>& points,
                                          const Eigen::Vector3d& plane_normal,
                                          const SideviewParams& params);

}  // namespace rowmap
