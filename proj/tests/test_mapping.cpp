#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Geometry>

#include "rowmap/error.hpp"
#include "rowmap/mapping.hpp"
#include "rowmap/rng.hpp"

using namespace rowmap;

namespace {

StalkObservation obs(int track_id, int frame, const Eigen::Vector3d& point) {
  return StalkObservation{track_id, frame, point};
}

}  // namespace

TEST_CASE("localize_pixel puts the optical axis on the plane") {
  const CameraIntrinsics k{600.0, 600.0, 320.0, 240.0};
  const Plane corn_cam{Eigen::Vector3d(0.0, 0.0, -1.0), 0.35};  // z = 0.35
  const Eigen::Vector3d world =
      localize_pixel(Pixel{320.0, 240.0}, k, corn_cam, RigidTransform{});
  CHECK((world - Eigen::Vector3d(0.0, 0.0, 0.35)).norm() < 1e-12);
}

TEST_CASE("localize_pixel round-trips through projection under a moved camera") {
  const CameraIntrinsics k{600.0, 600.0, 320.0, 240.0};
  const Plane corn_cam{Eigen::Vector3d(0.1, -0.05, -1.0).normalized(), 0.4};
  RigidTransform pose;
  pose.rotation = Eigen::AngleAxisd(0.3, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  pose.translation = Eigen::Vector3d(1.0, -2.0, 0.5);
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const Pixel px{rng.uniform(0.0, 639.0), rng.uniform(0.0, 479.0)};
    const Eigen::Vector3d world = localize_pixel(px, k, corn_cam, pose);
    const Eigen::Vector3d back_cam = pose.inverse().apply(world);
    CHECK(std::abs(corn_cam.signed_distance(back_cam)) < 1e-9);
    const Pixel reprojected = project(k, back_cam);
    CHECK(std::abs(reprojected.u - px.u) < 1e-9);
    CHECK(std::abs(reprojected.v - px.v) < 1e-9);
  }
}

TEST_CASE("localize_centroid is localize_pixel of the box center") {
  const CameraIntrinsics k{600.0, 600.0, 320.0, 240.0};
  const Plane corn_cam{Eigen::Vector3d(0.0, 0.0, -1.0), 0.35};
  const BBox box{300.0, 200.0, 340.0, 320.0};
  const Eigen::Vector3d via_box = localize_centroid(box, k, corn_cam, RigidTransform{});
  const Eigen::Vector3d via_pixel = localize_pixel(box.centroid(), k, corn_cam, RigidTransform{});
  CHECK((via_box - via_pixel).norm() == 0.0);
}

TEST_CASE("finalize rejects a gross outlier through the deviation gate") {
  MapBuilder builder;
  const Eigen::Vector3d truth(1.0, 2.0, 3.0);
  for (int frame = 0; frame < 9; ++frame) builder.accumulate(obs(7, frame, truth));
  builder.accumulate(obs(7, 9, truth + Eigen::Vector3d(5.0, 0.0, 0.0)));
  builder.add_frame_planes(Plane{}, Plane{});
  const SemanticMap map = builder.finalize();
  REQUIRE(map.landmarks.size() == 1);
  const StalkLandmark& lm = map.landmarks.front();
  CHECK((lm.position - truth).norm() < 1e-12);
  CHECK(lm.support == 9);
  CHECK(lm.rejected == 1);
  CHECK(lm.id == 7);
  CHECK(lm.track_ids == std::vector<int>{7});
}

TEST_CASE("finalize is invariant to observation insertion order") {
  Rng rng(11);
  std::vector<StalkObservation> all;
  for (int track = 1; track <= 4; ++track) {
    const Eigen::Vector3d center(0.5 * track, 0.35, 0.0);
    for (int frame = 0; frame < 8; ++frame) {
      all.push_back(obs(track, frame,
                        center + 0.002 * Eigen::Vector3d(rng.normal(), rng.normal(),
                                                         rng.normal())));
    }
  }
  MapBuilder forward, shuffled;
  for (const StalkObservation& o : all) forward.accumulate(o);
  std::vector<StalkObservation> reordered = all;
  for (std::size_t i = reordered.size(); i > 1; --i) {
    std::swap(reordered[i - 1], reordered[rng.uniform_index(i)]);
  }
  for (const StalkObservation& o : reordered) shuffled.accumulate(o);
  forward.add_frame_planes(Plane{}, Plane{});
  shuffled.add_frame_planes(Plane{}, Plane{});

  const SemanticMap a = forward.finalize();
  const SemanticMap b = shuffled.finalize();
  REQUIRE(a.landmarks.size() == b.landmarks.size());
  for (std::size_t i = 0; i < a.landmarks.size(); ++i) {
    CHECK(a.landmarks[i].id == b.landmarks[i].id);
    CHECK((a.landmarks[i].position - b.landmarks[i].position).norm() == 0.0);
    CHECK(a.landmarks[i].support == b.landmarks[i].support);
    CHECK(a.landmarks[i].track_ids == b.landmarks[i].track_ids);
  }
}

TEST_CASE("finalize drops tracks below min_support") {
  MapBuilder builder;
  for (int frame = 0; frame < 4; ++frame) {
    builder.accumulate(obs(1, frame, Eigen::Vector3d(1.0, 0.0, 0.0)));
  }
  for (int frame = 0; frame < 5; ++frame) {
    builder.accumulate(obs(2, frame, Eigen::Vector3d(2.0, 0.0, 0.0)));
  }
  builder.add_frame_planes(Plane{}, Plane{});
  FinalizeParams params;  // min_support = 5
  const SemanticMap map = builder.finalize(params);
  REQUIRE(map.landmarks.size() == 1);
  CHECK(map.landmarks.front().id == 2);
  params.min_support = 4;
  CHECK(builder.finalize(params).landmarks.size() == 2);
}

TEST_CASE("finalize merges nearby tracks support-weighted") {
  MapBuilder builder;
  const Eigen::Vector3d left(1.00, 0.35, 0.0);
  const Eigen::Vector3d right(1.03, 0.35, 0.0);  // 3 cm apart, within merge radius
  for (int frame = 0; frame < 10; ++frame) builder.accumulate(obs(3, frame, left));
  for (int frame = 0; frame < 5; ++frame) builder.accumulate(obs(8, frame, right));
  builder.add_frame_planes(Plane{}, Plane{});
  const SemanticMap map = builder.finalize();
  REQUIRE(map.landmarks.size() == 1);
  const StalkLandmark& lm = map.landmarks.front();
  CHECK(lm.id == 3);
  CHECK(lm.support == 15);
  CHECK(lm.track_ids == std::vector<int>{3, 8});
  const Eigen::Vector3d expected = (10.0 * left + 5.0 * right) / 15.0;
  CHECK((lm.position - expected).norm() < 1e-12);
}

TEST_CASE("finalize keeps distant tracks separate") {
  MapBuilder builder;
  for (int frame = 0; frame < 6; ++frame) {
    builder.accumulate(obs(1, frame, Eigen::Vector3d(1.0, 0.35, 0.0)));
    builder.accumulate(obs(2, frame, Eigen::Vector3d(1.2, 0.35, 0.0)));
  }
  builder.add_frame_planes(Plane{}, Plane{});
  const SemanticMap map = builder.finalize();
  REQUIRE(map.landmarks.size() == 2);
  CHECK(map.landmarks[0].id == 1);
  CHECK(map.landmarks[1].id == 2);
}

TEST_CASE("finalize takes the componentwise median of the frame planes") {
  MapBuilder builder;
  builder.accumulate(obs(1, 0, Eigen::Vector3d::Zero()));
  for (int frame = 0; frame < 5; ++frame) {
    builder.accumulate(obs(1, frame + 1, Eigen::Vector3d::Zero()));
  }
  const Plane truth{Eigen::Vector3d(0.0, -1.0, 0.0), 0.35};
  builder.add_frame_planes(Plane{Eigen::Vector3d::UnitZ(), 0.0}, truth);
  builder.add_frame_planes(Plane{Eigen::Vector3d::UnitZ(), 0.0}, truth);
  // One wild frame must not shift the median.
  builder.add_frame_planes(Plane{Eigen::Vector3d::UnitZ(), 0.0},
                           Plane{Eigen::Vector3d(0.5, -0.8, 0.33).normalized(), 0.9});
  const SemanticMap map = builder.finalize();
  CHECK((map.corn.normal - truth.normal).norm() < 1e-12);
  CHECK(std::abs(map.corn.offset - truth.offset) < 1e-12);
}

TEST_CASE("finalize preserves the pose sequence") {
  MapBuilder builder;
  for (int frame = 0; frame < 6; ++frame) {
    builder.accumulate(obs(1, frame, Eigen::Vector3d::Zero()));
  }
  RigidTransform first, second;
  first.translation = Eigen::Vector3d(0.1, 0.0, 0.0);
  second.translation = Eigen::Vector3d(0.2, 0.0, 0.0);
  builder.add_pose(first);
  builder.add_pose(second);
  builder.add_frame_planes(Plane{}, Plane{});
  const SemanticMap map = builder.finalize();
  REQUIRE(map.trajectory.size() == 2);
  CHECK((map.trajectory[0].translation - first.translation).norm() == 0.0);
  CHECK((map.trajectory[1].translation - second.translation).norm() == 0.0);
}

TEST_CASE("finalize on an empty builder throws") {
  const MapBuilder builder;
  CHECK(builder.empty());
  try {
    builder.finalize();
    REQUIRE_MESSAGE(false, "expected a rowmap::Error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyMap);
  }
}
