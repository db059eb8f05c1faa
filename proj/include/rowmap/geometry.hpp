#pragma once

#include <Eigen/Core>

#include "rowmap/error.hpp"

namespace rowmap {

/// Pinhole camera model. Camera frame: x right, y down, z forward (optical
/// axis). Pixel coordinates: u right, v down.
struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;

  Eigen::Matrix3d matrix() const;
  Eigen::Matrix3d inverse_matrix() const;
};

struct Pixel {
  double u = 0.0;
  double v = 0.0;
};

/// Rigid map X_out = R * X_in + c. Used both for camera poses (camera frame
/// to world) and for inter-frame motion (previous camera frame to next).
struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Eigen::Vector3d apply(const Eigen::Vector3d& x) const { return rotation * x + translation; }
  RigidTransform inverse() const;
  /// True when the rotation block is orthonormal with det +1 within tol.
  bool is_rigid(double tol = 1e-9) const;
};

/// outer after inner: (outer * inner)(x) = outer(inner(x)).
RigidTransform compose(const RigidTransform& outer, const RigidTransform& inner);

/// Plane {X : normal . X + offset = 0} with unit normal.
struct Plane {
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  double offset = 0.0;

  double signed_distance(const Eigen::Vector3d& x) const { return normal.dot(x) + offset; }
};

/// Re-express a plane in the output frame of to_target (X_out = to_target(X_in)).
Plane transform_plane(const RigidTransform& to_target, const Plane& plane);

/// Perspective projection of a camera-frame point. Throws NonPositiveDepth
/// for points at or behind the camera plane.
Pixel project(const CameraIntrinsics& K, const Eigen::Vector3d& point_cam);

/// Unit ray through a pixel; always has a positive z component.
Eigen::Vector3d backproject_ray(const CameraIntrinsics& K, const Pixel& px);

/// Intersection of origin + t * dir with a plane, requiring t > 0.
/// Throws RayParallelToPlane / IntersectionBehindCamera.
Eigen::Vector3d intersect_ray_plane(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir,
                                    const Plane& plane);

/// Homography K (R - c n^T / d) K^-1 induced by a plane under the camera
/// motion T (frame 1 to frame 2): maps frame-1 pixels of on-plane points to
/// their frame-2 pixels. Throws ZeroOffsetPlane when the plane passes through
/// the first camera center (|d| < 1e-12).
Eigen::Matrix3d plane_homography(const CameraIntrinsics& K, const RigidTransform& T,
                                 const Plane& plane);

/// Apply a 3x3 homography to a pixel (homogeneous normalization).
Pixel apply_homography(const Eigen::Matrix3d& H, const Pixel& px);

}  // namespace rowmap
