"""Smoke tests for the Python bindings.

These exercise the binding layer end to end — geometry helpers, the plane
estimator, the simulator, the full pipeline, and the benchmark table — without
re-testing the numerics, which the C++ suites cover in depth.
"""

import math

import numpy as np
import pytest

import rowmap


K = rowmap.CameraIntrinsics(fx=600.0, fy=600.0, cx=320.0, cy=240.0)


def test_project_backproject_round_trip():
    point = np.array([0.2, -0.1, 0.5])
    pixel = rowmap.project(K, point)
    ray = rowmap.backproject_ray(K, pixel)
    # The ray is unit length and parallel to the original point.
    assert math.isclose(np.linalg.norm(ray), 1.0, abs_tol=1e-12)
    assert np.linalg.norm(np.cross(ray, point / np.linalg.norm(point))) < 1e-12


def test_homography_matches_transform_then_project():
    plane = rowmap.Plane(normal=np.array([0.0, 0.0, -1.0]), offset=0.4)
    motion = rowmap.RigidTransform(
        rotation=np.eye(3), translation=np.array([-0.02, 0.0, 0.0])
    )
    h = rowmap.plane_homography(K, motion, plane)
    px1 = rowmap.Pixel(300.0, 250.0)
    mapped = rowmap.apply_homography(h, px1)

    ray = rowmap.backproject_ray(K, px1)
    hit = rowmap.intersect_ray_plane(np.zeros(3), ray, plane)
    direct = rowmap.project(K, motion.apply(hit))
    assert math.hypot(mapped.u - direct.u, mapped.v - direct.v) < 1e-9


def test_plane_distance_hand_case():
    # Identity-like camera, wall at z = 2, camera steps 1 m toward positive x:
    # the estimated offset must be exactly the wall distance.
    k = rowmap.CameraIntrinsics(fx=1.0, fy=1.0, cx=0.0, cy=0.0)
    motion = rowmap.RigidTransform(
        rotation=np.eye(3), translation=np.array([-1.0, 0.0, 0.0])
    )
    normal = np.array([0.0, 0.0, -1.0])
    matches = []
    for x, y in [(0.0, 0.0), (0.4, 0.2), (-0.3, 0.1), (0.2, -0.4), (-0.1, -0.2)]:
        p1 = rowmap.project(k, np.array([x, y, 2.0]))
        p2 = rowmap.project(k, motion.apply(np.array([x, y, 2.0])))
        matches.append(rowmap.FeatureMatch(p1, p2))
    estimate = rowmap.estimate_plane_distance(matches, k, motion, normal)
    assert math.isclose(estimate.plane.offset, 2.0, rel_tol=1e-9)
    assert estimate.inlier_count == len(matches)


def test_estimator_raises_mapped_error():
    with pytest.raises(rowmap.RowmapError, match="NoConsensus"):
        rowmap.estimate_plane_distance(
            [],
            K,
            rowmap.RigidTransform(
                rotation=np.eye(3), translation=np.array([-0.01, 0.0, 0.0])
            ),
            np.array([0.0, 0.0, -1.0]),
        )


def test_simulate_run_evaluate_small_field():
    spec = rowmap.SimSpec()
    spec.field.stalk_count = 12
    spec.trajectory.length = 1.2
    log = rowmap.simulate(spec, seed=7)
    assert len(log.frames) == 120
    assert len(log.scene.stalk_positions) == 12

    result = rowmap.run_pipeline(log)
    assert result.frames_total == len(log.frames)
    assert result.frames_with_plane > 0
    assert len(result.map.landmarks) > 0
    assert len(result.poses) == len(log.frames)

    report = rowmap.evaluate_run(result, log.scene, K)
    assert math.isfinite(report.epsilon1_cm)
    assert report.epsilon1_cm < 1.0  # noise-free: well under a centimeter
    assert report.matched > 0


def test_log_round_trip(tmp_path):
    spec = rowmap.SimSpec()
    spec.field.stalk_count = 6
    spec.trajectory.length = 0.6
    log = rowmap.simulate(spec, seed=3)
    path = str(tmp_path / "log.jsonl")
    rowmap.write_log(log, path, with_timestamp=False)
    reread = rowmap.read_log(path)
    assert reread.seed == log.seed
    assert len(reread.frames) == len(log.frames)


def test_benchmark_table_and_csv():
    methods = rowmap.default_method_table()
    assert [m.name for m in methods] == [
        "our_approach",
        "corridor_prediction",
        "front_view_slam",
        "side_view_slam",
        "ransac_plane_fitting",
        "optical_flow_tracking",
    ]

    spec = rowmap.SimSpec()
    spec.field.stalk_count = 10
    spec.trajectory.length = 1.0
    log = rowmap.simulate(spec, seed=11)
    rows = rowmap.run_benchmark(log, methods)
    assert len(rows) == len(methods)

    csv = rowmap.benchmark_csv(rows)
    lines = csv.strip().split("\n")
    assert lines[0] == "method,epsilon1_cm,epsilon2_px,matched,unmatched"
    assert len(lines) == 1 + len(methods)
    assert lines[1].startswith("our_approach,")
