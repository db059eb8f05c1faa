#pragma once

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "rowmap/geometry.hpp"

namespace rowmap {

struct BBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  Pixel centroid() const { return Pixel{0.5 * (x_min + x_max), 0.5 * (y_min + y_max)}; }
};

struct Detection {
  BBox bbox;
  double score = 1.0;
  int frame = 0;
};

/// Intersection over union of two axis-aligned boxes, in [0, 1].
double iou(const BBox& a, const BBox& b);

/// Exact minimum-cost assignment (shortest augmenting path). Rectangular
/// matrices are padded internally; returns min(rows, cols) pairs (row, col).
std::vector<std::pair<int, int>> hungarian_min_cost(const Eigen::MatrixXd& cost);

using Vector7d = Eigen::Matrix<double, 7, 1>;
using Matrix7d = Eigen::Matrix<double, 7, 7>;
using Vector4d = Eigen::Vector4d;

/// Constant-velocity box filter state: center u, center v, area s, aspect r,
/// and the velocities of u, v, s. The aspect ratio is modeled as constant.
struct TrackState {
  Vector7d mean = Vector7d::Zero();
  Matrix7d covariance = Matrix7d::Identity();
};

struct KalmanParams {
  Vector4d measurement_noise{1.0, 1.0, 10.0, 10.0};
  Vector7d process_noise{1.0, 1.0, 1.0, 1.0, 0.01, 0.01, 1e-4};
  Vector7d initial_covariance{10.0, 10.0, 10.0, 10.0, 1e4, 1e4, 1e4};
};

Vector4d bbox_to_measurement(const BBox& box);
BBox measurement_to_bbox(const Vector4d& z);

TrackState kalman_init(const BBox& box, const KalmanParams& params);
TrackState kalman_predict(const TrackState& state, const KalmanParams& params);
TrackState kalman_update(const TrackState& state, const BBox& box, const KalmanParams& params);

struct Track {
  int id = 0;
  TrackState state;
  int hits = 0;
  int misses_since_hit = 0;
  int age = 0;
};

struct SortParams {
  double iou_gate = 0.3;
  int max_age = 5;
  int min_hits = 3;
  KalmanParams kalman;
};

struct TrackedBox {
  int id = 0;
  BBox bbox;
  int detection_index = -1;  // index into this frame's detections
};

/// Detection-by-detection tracker: predict every track, associate detections
/// by IoU-gated minimum-cost assignment, update matched filters, spawn tracks
/// for unmatched detections, retire tracks unmatched for over max_age frames.
/// Track ids are never reused.
class SortTracker {
 public:
  explicit SortTracker(const SortParams& params = SortParams{}) : params_(params) {}

  /// Returns confirmed tracks updated this frame (hits >= min_hits, with a
  /// grace period during the first min_hits frames).
  std::vector<TrackedBox> step(const std::vector<Detection>& detections);

  const std::vector<Track>& tracks() const { return tracks_; }
  int frame_count() const { return frame_count_; }

 private:
  SortParams params_;
  std::vector<Track> tracks_;
  int next_id_ = 1;
  int frame_count_ = 0;
};

struct FlowParams {
  int redetect_every = 30;
};

struct TrackedCentroid {
  int id = 0;
  Pixel centroid;
  int origin_detection = -1;  // detection index at the last re-detection frame
};

/// Displacement-following baseline: centroids seeded from detections every
/// redetect_every frames (fresh ids each time) and advanced by the supplied
/// per-centroid displacements in between. Throws MissingDisplacement when the
/// displacement list does not line up with the live centroids.
class FlowTracker {
 public:
  explicit FlowTracker(const FlowParams& params = FlowParams{}) : params_(params) {}

  std::vector<TrackedCentroid> step(const std::vector<Eigen::Vector2d>& displacements,
                                    const std::optional<std::vector<Detection>>& detections);

  int frame_count() const { return frame_count_; }

 private:
  FlowParams params_;
  std::vector<TrackedCentroid> entries_;
  int next_id_ = 1;
  int frame_count_ = 0;
};

}  // namespace rowmap
