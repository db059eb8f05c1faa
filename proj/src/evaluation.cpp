#include "rowmap/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <unordered_map>

#include <Eigen/Eigenvalues>

namespace rowmap {

LineFit fit_trajectory_line(const std::vector<RigidTransform>& poses) {
  if (poses.size() < 2) {
    throw Error(ErrorCode::DegenerateInput, "need at least 2 poses for a line fit");
  }
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const RigidTransform& pose : poses) mean += pose.translation;
  mean /= static_cast<double>(poses.size());

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const RigidTransform& pose : poses) {
    const Eigen::Vector3d d = pose.translation - mean;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
  if (solver.eigenvalues()(2) <= 0.0) {
    throw Error(ErrorCode::DegenerateInput, "camera positions are coincident");
  }
  LineFit fit;
  fit.origin = mean;
  fit.direction = solver.eigenvectors().col(2);  // largest eigenvalue last
  const Eigen::Vector3d travel = poses.back().translation - poses.front().translation;
  if (fit.direction.dot(travel) < 0.0) fit.direction = -fit.direction;
  return fit;
}

double epsilon1_cm(const SemanticMap& map, const GroundTruth& scene,
                   const std::vector<RigidTransform>& poses, int* matched, int* unmatched) {
  if (matched) *matched = 0;
  if (unmatched) *unmatched = static_cast<int>(scene.stalk_positions.size());
  if (map.landmarks.empty() || scene.stalk_positions.size() < 2) {
    throw Error(ErrorCode::InsufficientLandmarks, "no landmarks to compare");
  }
  const LineFit line = fit_trajectory_line(poses);
  auto coord = [&](const Eigen::Vector3d& p) { return line.direction.dot(p - line.origin); };

  std::vector<double> landmark_t;
  landmark_t.reserve(map.landmarks.size());
  for (const StalkLandmark& lm : map.landmarks) landmark_t.push_back(coord(lm.position));

  // Match gate: just under half the typical spacing, so one stalk can never
  // capture its neighbor's landmark.
  std::vector<double> gaps = scene.neighbor_gaps;
  std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
  const double gate = 0.45 * gaps[gaps.size() / 2];

  const int stalks = static_cast<int>(scene.stalk_positions.size());
  std::vector<int> best_landmark(stalks, -1);
  std::vector<double> best_dist(stalks, std::numeric_limits<double>::infinity());
  for (std::size_t l = 0; l < landmark_t.size(); ++l) {
    for (int s = 0; s < stalks; ++s) {
      const double dist = std::abs(landmark_t[l] - coord(scene.stalk_positions[s]));
      if (dist <= gate && dist < best_dist[s]) {
        best_dist[s] = dist;
        best_landmark[s] = static_cast<int>(l);
      }
    }
  }

  int matched_count = 0;
  for (int s = 0; s < stalks; ++s) matched_count += best_landmark[s] >= 0 ? 1 : 0;
  if (matched) *matched = matched_count;
  if (unmatched) *unmatched = stalks - matched_count;

  double total = 0.0;
  int pairs = 0;
  for (int s = 0; s + 1 < stalks; ++s) {
    if (best_landmark[s] < 0 || best_landmark[s + 1] < 0) continue;
    if (best_landmark[s] == best_landmark[s + 1]) continue;  // one landmark, two stalks
    const double estimated = landmark_t[best_landmark[s + 1]] - landmark_t[best_landmark[s]];
    total += std::abs(estimated - scene.neighbor_gaps[s]);
    ++pairs;
  }
  if (pairs == 0) {
    throw Error(ErrorCode::InsufficientLandmarks, "no adjacent matched stalk pairs");
  }
  return 100.0 * total / pairs;
}

double epsilon2_px(const SemanticMap& map, const std::vector<FrameTracks>& tracks,
                   const std::vector<RigidTransform>& poses, const CameraIntrinsics& K) {
  std::unordered_map<int, const StalkLandmark*> by_track;
  for (const StalkLandmark& lm : map.landmarks) {
    for (int track_id : lm.track_ids) by_track.emplace(track_id, &lm);
  }
  double total = 0.0;
  int count = 0;
  for (const FrameTracks& frame : tracks) {
    if (frame.frame < 0 || frame.frame >= static_cast<int>(poses.size())) continue;
    const RigidTransform to_cam = poses[frame.frame].inverse();
    for (const TrackedItem& item : frame.items) {
      const auto it = by_track.find(item.track_id);
      if (it == by_track.end()) continue;
      const Eigen::Vector3d in_cam = to_cam.apply(it->second->position);
      if (in_cam.z() <= 0.0) continue;
      const Pixel projected = project(K, in_cam);
      total += std::hypot(projected.u - item.pixel.u, projected.v - item.pixel.v);
      ++count;
    }
  }
  if (count == 0) {
    throw Error(ErrorCode::NoLinkedTracks, "no tracked centroid belongs to a landmark");
  }
  return total / count;
}

MetricReport evaluate_run(const PipelineResult& result, const GroundTruth& scene,
                          const CameraIntrinsics& K) {
  MetricReport report;
  report.epsilon1_cm =
      epsilon1_cm(result.map, scene, result.poses, &report.matched, &report.unmatched);
  report.epsilon2_px = epsilon2_px(result.map, result.tracks, result.poses, K);
  return report;
}

std::vector<MethodSpec> default_method_table() {
  std::vector<MethodSpec> methods(6);

  methods[0].name = "our_approach";
  // Defaults: SfM plane distance + box tracking + base odometry.

  methods[1].name = "corridor_prediction";
  methods[1].config.plane_source = PlaneSource::Corridor;

  methods[2].name = "front_view_slam";
  methods[2].config.odometry = OdomProfile::Front;

  methods[3].name = "side_view_slam";
  methods[3].config.odometry = OdomProfile::Side;

  methods[4].name = "ransac_plane_fitting";
  methods[4].config.plane_source = PlaneSource::DepthRansac;

  methods[5].name = "optical_flow_tracking";
  methods[5].config.tracker = TrackerKind::Flow;

  return methods;
}

std::vector<BenchmarkRow> run_benchmark(const ObservationLog& log,
                                        const std::vector<MethodSpec>& methods) {
  std::vector<BenchmarkRow> rows;
  rows.reserve(methods.size());
  for (const MethodSpec& method : methods) {
    BenchmarkRow row;
    row.method = method.name;
    try {
      const PipelineResult result = run_pipeline(log, method.config);
      const MetricReport report =
          evaluate_run(result, log.scene, log.specs.rig.side.intrinsics);
      row.epsilon1_cm = report.epsilon1_cm;
      row.epsilon2_px = report.epsilon2_px;
      row.matched = report.matched;
      row.unmatched = report.unmatched;
    } catch (const Error&) {
      row.epsilon1_cm = std::numeric_limits<double>::quiet_NaN();
      row.epsilon2_px = std::numeric_limits<double>::quiet_NaN();
      row.matched = 0;
      row.unmatched = 0;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string benchmark_csv(const std::vector<BenchmarkRow>& rows) {
  std::string out = "method,epsilon1_cm,epsilon2_px,matched,unmatched\n";
  char buffer[160];
  for (const BenchmarkRow& row : rows) {
    std::snprintf(buffer, sizeof(buffer), "%s,%.9g,%.9g,%d,%d\n", row.method.c_str(),
                  row.epsilon1_cm, row.epsilon2_px, row.matched, row.unmatched);
    out += buffer;
  }
  return out;
}

}  // namespace rowmap
