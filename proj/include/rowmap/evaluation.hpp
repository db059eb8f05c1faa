#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "rowmap/pipeline.hpp"
#include "rowmap/simulator.hpp"

namespace rowmap {

/// Least-squares 3D line through the camera positions, direction oriented
/// along the direction of travel. Throws DegenerateInput for fewer than two
/// poses or coincident positions.
struct LineFit {
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  Eigen::Vector3d direction = Eigen::Vector3d::UnitX();  // unit
};
LineFit fit_trajectory_line(const std::vector<RigidTransform>& poses);

/// Inter-plant spacing error, centimeters. Landmarks and true stalks are
/// projected onto the trajectory line, each true stalk is matched to its
/// nearest landmark within the gate (closest landmark wins duplicates), and
/// consecutive matched stalks contribute |estimated gap - true gap|.
/// `matched`/`unmatched` (optional) receive the per-stalk match counts.
/// Throws InsufficientLandmarks when fewer than two consecutive stalks match.
double epsilon1_cm(const SemanticMap& map, const GroundTruth& scene,
                   const std::vector<RigidTransform>& poses, int* matched = nullptr,
                   int* unmatched = nullptr);

/// Mean reprojection distance (pixels) between each frame's tracked centroids
/// and the finalized landmark their track was merged into, using the run's
/// own poses. Throws NoLinkedTracks when no tracked centroid belongs to any
/// landmark.
double epsilon2_px(const SemanticMap& map, const std::vector<FrameTracks>& tracks,
                   const std::vector<RigidTransform>& poses, const CameraIntrinsics& K);

struct MetricReport {
  double epsilon1_cm = 0.0;
  double epsilon2_px = 0.0;
  int matched = 0;
  int unmatched = 0;
};

/// Both metrics for one pipeline run against the simulated truth.
MetricReport evaluate_run(const PipelineResult& result, const GroundTruth& scene,
                          const CameraIntrinsics& K);

struct MethodSpec {
  std::string name;
  RunConfig config;
};

/// The comparison grid: the full approach plus the baselines it is ranked
/// against (corridor prediction, higher-noise front/side odometry profiles,
/// direct depth plane fitting, optical-flow tracking).
std::vector<MethodSpec> default_method_table();

struct BenchmarkRow {
  std::string method;
  double epsilon1_cm = 0.0;
  double epsilon2_px = 0.0;
  int matched = 0;
  int unmatched = 0;
};

/// Runs every method on the same log. Methods that fail outright produce a
/// row with NaN metrics and zero matches instead of aborting the table.
std::vector<BenchmarkRow> run_benchmark(const ObservationLog& log,
                                        const std::vector<MethodSpec>& methods);

/// CSV with the fixed header method,epsilon1_cm,epsilon2_px,matched,unmatched.
std::string benchmark_csv(const std::vector<BenchmarkRow>& rows);

}  // namespace rowmap
