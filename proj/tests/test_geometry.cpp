#include <doctest.h>

#include <cmath>

#include <Eigen/Geometry>

#include "rowmap/error.hpp"
#include "rowmap/geometry.hpp"
#include "rowmap/rng.hpp"

using namespace rowmap;

namespace {

Eigen::Matrix3d random_rotation(Rng& rng) {
  const Eigen::Vector3d axis(rng.normal(), rng.normal(), rng.normal());
  return Eigen::AngleAxisd(rng.uniform(-M_PI, M_PI), axis.normalized()).toRotationMatrix();
}

RigidTransform random_transform(Rng& rng, double translation_scale) {
  RigidTransform t;
  t.rotation = random_rotation(rng);
  t.translation = translation_scale * Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
  return t;
}

template <typename Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  REQUIRE_MESSAGE(false, "expected a rowmap::Error");
  return ErrorCode::IoError;  // unreachable
}

}  // namespace

TEST_CASE("intrinsics matrix and its inverse cancel") {
  const CameraIntrinsics k{520.0, 610.0, 310.5, 245.25};
  CHECK((k.inverse_matrix() * k.matrix() - Eigen::Matrix3d::Identity()).norm() < 1e-12);
}

TEST_CASE("project evaluates the pinhole formula") {
  const CameraIntrinsics k{600.0, 600.0, 320.0, 240.0};
  const Pixel px = project(k, Eigen::Vector3d(0.35, -0.10, 0.70));
  CHECK(std::abs(px.u - 620.0) < 1e-12);
  CHECK(std::abs(px.v - (240.0 - 600.0 / 7.0)) < 1e-12);
}

TEST_CASE("project rejects points at or behind the camera") {
  const CameraIntrinsics k{600.0, 600.0, 320.0, 240.0};
  CHECK(code_of([&] { project(k, Eigen::Vector3d::Zero()); }) == ErrorCode::NonPositiveDepth);
  CHECK(code_of([&] { project(k, Eigen::Vector3d(0.1, 0.2, -1.0)); }) ==
        ErrorCode::NonPositiveDepth);
}

TEST_CASE("backproject_ray inverts project up to scale") {
  const CameraIntrinsics k{520.0, 610.0, 310.5, 245.25};
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const Eigen::Vector3d point(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0),
                                rng.uniform(0.1, 10.0));
    const Eigen::Vector3d ray = backproject_ray(k, project(k, point));
    CHECK(std::abs(ray.norm() - 1.0) < 1e-12);
    CHECK(ray.z() > 0.0);
    CHECK(ray.cross(point.normalized()).norm() < 1e-12);
  }
}

TEST_CASE("intersect_ray_plane hits a hand-checked point") {
  const Plane plane{Eigen::Vector3d::UnitZ(), -2.0};  // z = 2
  const Eigen::Vector3d hit = intersect_ray_plane(
      Eigen::Vector3d::Zero(), Eigen::Vector3d(0.5, 0.0, 1.0).normalized(), plane);
  CHECK((hit - Eigen::Vector3d(1.0, 0.0, 2.0)).norm() < 1e-12);
}

TEST_CASE("intersect_ray_plane residuals vanish on random scenes") {
  Rng rng(17);
  int accepted = 0;
  for (int i = 0; i < 500; ++i) {
    Plane plane;
    plane.normal = Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()).normalized();
    plane.offset = rng.uniform(-3.0, 3.0);
    const Eigen::Vector3d origin(rng.normal(), rng.normal(), rng.normal());
    const Eigen::Vector3d dir =
        Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()).normalized();
    try {
      const Eigen::Vector3d hit = intersect_ray_plane(origin, dir, plane);
      CHECK(std::abs(plane.signed_distance(hit)) < 1e-9 * std::max(1.0, hit.norm()));
      CHECK((hit - origin).dot(dir) > 0.0);
      ++accepted;
    } catch (const Error& e) {
      const bool expected = e.code() == ErrorCode::IntersectionBehindCamera ||
                            e.code() == ErrorCode::RayParallelToPlane;
      CHECK(expected);
    }
  }
  CHECK(accepted > 100);
}

TEST_CASE("intersect_ray_plane error cases") {
  const Plane ahead{Eigen::Vector3d::UnitZ(), -2.0};
  const Plane behind{Eigen::Vector3d::UnitZ(), 2.0};
  CHECK(code_of([&] {
          intersect_ray_plane(Eigen::Vector3d::Zero(), Eigen::Vector3d::UnitX(), ahead);
        }) == ErrorCode::RayParallelToPlane);
  CHECK(code_of([&] {
          intersect_ray_plane(Eigen::Vector3d::Zero(), Eigen::Vector3d::UnitZ(), behind);
        }) == ErrorCode::IntersectionBehindCamera);
}

TEST_CASE("compose applies inner before outer") {
  Rng rng(23);
  for (int i = 0; i < 100; ++i) {
    const RigidTransform outer = random_transform(rng, 2.0);
    const RigidTransform inner = random_transform(rng, 2.0);
    const Eigen::Vector3d x(rng.normal(), rng.normal(), rng.normal());
    CHECK((compose(outer, inner).apply(x) - outer.apply(inner.apply(x))).norm() < 1e-12);
  }
}

TEST_CASE("inverse undoes a rigid transform") {
  Rng rng(29);
  for (int i = 0; i < 100; ++i) {
    const RigidTransform t = random_transform(rng, 5.0);
    const RigidTransform round = compose(t.inverse(), t);
    CHECK((round.rotation - Eigen::Matrix3d::Identity()).norm() < 1e-12);
    CHECK(round.translation.norm() < 1e-12);
    const Eigen::Vector3d x(rng.normal(), rng.normal(), rng.normal());
    CHECK((t.inverse().apply(t.apply(x)) - x).norm() < 1e-12);
  }
}

TEST_CASE("is_rigid accepts rotations, rejects scalings and reflections") {
  Rng rng(31);
  RigidTransform t;
  t.rotation = random_rotation(rng);
  CHECK(t.is_rigid());
  RigidTransform scaled = t;
  scaled.rotation *= 1.0 + 1e-6;
  CHECK_FALSE(scaled.is_rigid());
  RigidTransform reflected = t;
  reflected.rotation.col(0) = -reflected.rotation.col(0);  // det -1, still orthonormal
  CHECK_FALSE(reflected.is_rigid());
}

TEST_CASE("transform_plane keeps transformed points on the plane") {
  Rng rng(37);
  for (int i = 0; i < 200; ++i) {
    Plane plane;
    plane.normal = Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()).normalized();
    plane.offset = rng.uniform(-3.0, 3.0);
    const RigidTransform to_target = random_transform(rng, 2.0);
    const Plane moved = transform_plane(to_target, plane);
    CHECK(std::abs(moved.normal.norm() - 1.0) < 1e-12);
    const Eigen::Vector3d tangent = plane.normal.unitOrthogonal();
    const Eigen::Vector3d bitangent = plane.normal.cross(tangent);
    for (int j = 0; j < 5; ++j) {
      const Eigen::Vector3d on_plane = -plane.offset * plane.normal +
                                       rng.uniform(-4.0, 4.0) * tangent +
                                       rng.uniform(-4.0, 4.0) * bitangent;
      CHECK(std::abs(moved.signed_distance(to_target.apply(on_plane))) < 1e-9);
    }
  }
}

TEST_CASE("transform_plane round-trips through the inverse") {
  Rng rng(41);
  Plane plane{Eigen::Vector3d(0.3, -0.5, 0.8).normalized(), 1.25};
  const RigidTransform t = random_transform(rng, 3.0);
  const Plane back = transform_plane(t.inverse(), transform_plane(t, plane));
  CHECK((back.normal - plane.normal).norm() < 1e-12);
  CHECK(std::abs(back.offset - plane.offset) < 1e-12);
}

TEST_CASE("plane homography agrees with transform-then-project") {
  Rng rng(43);
  const CameraIntrinsics k{600.0, 600.0, 320.0, 240.0};
  int checked = 0;
  for (int scene = 0; scene < 20; ++scene) {
    Plane plane;
    plane.normal = Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()).normalized();
    plane.offset = rng.uniform(0.2, 3.0) * (rng.bernoulli(0.5) ? 1.0 : -1.0);
    RigidTransform motion;  // small inter-frame motion, like consecutive video frames
    motion.rotation =
        Eigen::AngleAxisd(rng.uniform(-0.05, 0.05),
                          Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()).normalized())
            .toRotationMatrix();
    motion.translation = 0.05 * Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
    const Eigen::Matrix3d h = plane_homography(k, motion, plane);
    const Eigen::Vector3d tangent = plane.normal.unitOrthogonal();
    const Eigen::Vector3d bitangent = plane.normal.cross(tangent);
    for (int j = 0; j < 50; ++j) {
      const Eigen::Vector3d x1 = -plane.offset * plane.normal +
                                 rng.uniform(-2.0, 2.0) * tangent +
                                 rng.uniform(-2.0, 2.0) * bitangent;
      const Eigen::Vector3d x2 = motion.apply(x1);
      if (x1.z() < 0.2 || x2.z() < 0.2) continue;
      const Pixel direct = project(k, x2);
      const Pixel mapped = apply_homography(h, project(k, x1));
      CHECK(std::abs(mapped.u - direct.u) < 1e-9);
      CHECK(std::abs(mapped.v - direct.v) < 1e-9);
      ++checked;
    }
  }
  CHECK(checked > 200);
}

TEST_CASE("plane homography hand case: unit sideways step against a depth-2 wall") {
  const CameraIntrinsics k{1.0, 1.0, 0.0, 0.0};
  RigidTransform motion;
  motion.translation = Eigen::Vector3d(-1.0, 0.0, 0.0);
  const Plane wall{Eigen::Vector3d(0.0, 0.0, -1.0), 2.0};  // z = 2 in both frames
  const Pixel mapped = apply_homography(plane_homography(k, motion, wall), Pixel{0.0, 0.0});
  CHECK(std::abs(mapped.u - (-0.5)) < 1e-12);
  CHECK(std::abs(mapped.v) < 1e-12);
}

TEST_CASE("plane homography rejects planes through the first camera center") {
  const CameraIntrinsics k{600.0, 600.0, 320.0, 240.0};
  RigidTransform motion;
  motion.translation = Eigen::Vector3d(0.01, 0.0, 0.0);
  CHECK(code_of([&] { plane_homography(k, motion, Plane{Eigen::Vector3d::UnitY(), 0.0}); }) ==
        ErrorCode::ZeroOffsetPlane);
}

TEST_CASE("apply_homography with identity leaves pixels fixed") {
  const Pixel px{123.25, -4.5};
  const Pixel out = apply_homography(Eigen::Matrix3d::Identity(), px);
  CHECK(out.u == px.u);
  CHECK(out.v == px.v);
}
