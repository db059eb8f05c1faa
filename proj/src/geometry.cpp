#include "rowmap/geometry.hpp"

#include <cmath>

#include <Eigen/LU>

namespace rowmap {

namespace {
constexpr double kParallelTol = 1e-9;
}

Eigen::Matrix3d CameraIntrinsics::matrix() const {
  Eigen::Matrix3d K;
  K << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
  return K;
}

Eigen::Matrix3d CameraIntrinsics::inverse_matrix() const {
  Eigen::Matrix3d Kinv;
  Kinv << 1.0 / fx, 0.0, -cx / fx, 0.0, 1.0 / fy, -cy / fy, 0.0, 0.0, 1.0;
  return Kinv;
}

RigidTransform RigidTransform::inverse() const {
  RigidTransform out;
  out.rotation = rotation.transpose();
  out.translation = -(rotation.transpose() * translation);
  return out;
}

bool RigidTransform::is_rigid(double tol) const {
  const Eigen::Matrix3d err = rotation.transpose() * rotation - Eigen::Matrix3d::Identity();
  if (err.cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(rotation.determinant() - 1.0) <= tol;
}

RigidTransform compose(const RigidTransform& outer, const RigidTransform& inner) {
  RigidTransform out;
  out.rotation = outer.rotation * inner.rotation;
  out.translation = outer.rotation * inner.translation + outer.translation;
  return out;
}

Plane transform_plane(const RigidTransform& to_target, const Plane& plane) {
  // n_in . X_in + d = n_in . R^T (X_out - c) + d.
  Plane out;
  out.normal = to_target.rotation * plane.normal;
  out.offset = plane.offset - out.normal.dot(to_target.translation);
  return out;
}

Pixel project(const CameraIntrinsics& K, const Eigen::Vector3d& point_cam) {
  if (point_cam.z() <= 0.0) {
    throw Error(ErrorCode::NonPositiveDepth,
                "cannot project point with depth " + std::to_string(point_cam.z()));
  }
  return Pixel{K.fx * point_cam.x() / point_cam.z() + K.cx,
               K.fy * point_cam.y() / point_cam.z() + K.cy};
}

Eigen::Vector3d backproject_ray(const CameraIntrinsics& K, const Pixel& px) {
  const Eigen::Vector3d dir((px.u - K.cx) / K.fx, (px.v - K.cy) / K.fy, 1.0);
  return dir.normalized();
}

Eigen::Vector3d intersect_ray_plane(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir,
                                    const Plane& plane) {
  const double denom = plane.normal.dot(dir);
  if (std::abs(denom) < kParallelTol) {
    throw Error(ErrorCode::RayParallelToPlane, "ray direction lies in the plane");
  }
  const double t = -plane.signed_distance(origin) / denom;
  if (t <= 0.0) {
    throw Error(ErrorCode::IntersectionBehindCamera,
                "plane intersection at t = " + std::to_string(t));
  }
  return origin + t * dir;
}

Eigen::Matrix3d plane_homography(const CameraIntrinsics& K, const RigidTransform& T,
                                 const Plane& plane) {
  if (std::abs(plane.offset) < 1e-12) {
    throw Error(ErrorCode::ZeroOffsetPlane, "plane passes through the first camera center");
  }
  // On-plane points satisfy n.X = -d, so X2 = (R - c n^T / d) X1.
  const Eigen::Matrix3d M =
      T.rotation - T.translation * plane.normal.transpose() / plane.offset;
  return K.matrix() * M * K.inverse_matrix();
}

Pixel apply_homography(const Eigen::Matrix3d& H, const Pixel& px) {
  const Eigen::Vector3d mapped = H * Eigen::Vector3d(px.u, px.v, 1.0);
  if (std::abs(mapped.z()) < 1e-15) {
    throw Error(ErrorCode::NonPositiveDepth, "homography maps pixel to infinity");
  }
  return Pixel{mapped.x() / mapped.z(), mapped.y() / mapped.z()};
}

}  // namespace rowmap
