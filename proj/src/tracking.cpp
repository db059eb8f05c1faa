#include "rowmap/tracking.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/LU>
#include <limits>

namespace rowmap {

double iou(const BBox& a, const BBox& b) {
  const double ix = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double iy = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (ix <= 0.0 || iy <= 0.0) return 0.0;
  const double intersection = ix * iy;
  const double area_a = a.width() * a.height();
  const double area_b = b.width() * b.height();
  const double denom = area_a + area_b - intersection;
  if (denom <= 0.0) return 0.0;
  return intersection / denom;
}

std::vector<std::pair<int, int>> hungarian_min_cost(const Eigen::MatrixXd& cost) {
  const int rows = static_cast<int>(cost.rows());
  const int cols = static_cast<int>(cost.cols());
  if (rows == 0 || cols == 0) return {};

  // The augmenting-path algorithm below wants rows <= cols; transpose back
  // at the end if needed. Padding columns carry zero cost, which shifts every
  // complete assignment by the same constant.
  const bool transposed = rows > cols;
  const int n = transposed ? cols : rows;
  const int m = transposed ? rows : cols;
  auto at = [&](int r, int c) -> double {
    return transposed ? cost(c, r) : cost(r, c);
  };

  const double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> row_potential(n + 1, 0.0), col_potential(m + 1, 0.0);
  std::vector<int> col_match(m + 1, 0);  // col -> row (1-based; 0 = free)
  std::vector<int> path(m + 1, 0);

  for (int r = 1; r <= n; ++r) {
    col_match[0] = r;
    int j0 = 0;
    std::vector<double> min_slack(m + 1, kInf);
    std::vector<bool> used(m + 1, false);
    do {
      used[j0] = true;
      const int r0 = col_match[j0];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double reduced = at(r0 - 1, j - 1) - row_potential[r0] - col_potential[j];
        if (reduced < min_slack[j]) {
          min_slack[j] = reduced;
          path[j] = j0;
        }
        if (min_slack[j] < delta) {
          delta = min_slack[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          row_potential[col_match[j]] += delta;
          col_potential[j] -= delta;
        } else {
          min_slack[j] -= delta;
        }
      }
      j0 = j1;
    } while (col_match[j0] != 0);
    do {
      const int j1 = path[j0];
      col_match[j0] = col_match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(n);
  for (int j = 1; j <= m; ++j) {
    if (col_match[j] == 0) continue;
    const int r = col_match[j] - 1;
    const int c = j - 1;
    pairs.emplace_back(transposed ? c : r, transposed ? r : c);
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

Vector4d bbox_to_measurement(const BBox& box) {
  const double w = box.width();
  const double h = box.height();
  return Vector4d{box.x_min + 0.5 * w, box.y_min + 0.5 * h, w * h, w / h};
}

BBox measurement_to_bbox(const Vector4d& z) {
  const double w = std::sqrt(std::max(z(2) * z(3), 0.0));
  const double h = w > 0.0 ? z(2) / w : 0.0;
  return BBox{z(0) - 0.5 * w, z(1) - 0.5 * h, z(0) + 0.5 * w, z(1) + 0.5 * h};
}

namespace {

Eigen::Matrix<double, 7, 7> motion_matrix() {
  Matrix7d F = Matrix7d::Identity();
  F(0, 4) = 1.0;
  F(1, 5) = 1.0;
  F(2, 6) = 1.0;
  return F;
}

Eigen::Matrix<double, 4, 7> measurement_matrix() {
  Eigen::Matrix<double, 4, 7> H = Eigen::Matrix<double, 4, 7>::Zero();
  H.block<4, 4>(0, 0).setIdentity();
  return H;
}

}  // namespace

TrackState kalman_init(const BBox& box, const KalmanParams& params) {
  TrackState state;
  state.mean.head<4>() = bbox_to_measurement(box);
  state.covariance = params.initial_covariance.asDiagonal();
  return state;
}

TrackState kalman_predict(const TrackState& state, const KalmanParams& params) {
  TrackState out = state;
  // Keep the area positive: freeze its velocity when a step would cross zero.
  if (out.mean(2) + out.mean(6) <= 0.0) out.mean(6) = 0.0;
  const Matrix7d F = motion_matrix();
  out.mean = F * out.mean;
  out.covariance = F * out.covariance * F.transpose();
  out.covariance += Matrix7d(params.process_noise.asDiagonal());
  return out;
}

TrackState kalman_update(const TrackState& state, const BBox& box, const KalmanParams& params) {
  const Eigen::Matrix<double, 4, 7> H = measurement_matrix();
  const Eigen::Matrix4d R = params.measurement_noise.asDiagonal();
  const Vector4d innovation = bbox_to_measurement(box) - H * state.mean;
  const Eigen::Matrix4d S = H * state.covariance * H.transpose() + R;
  const Eigen::Matrix<double, 7, 4> gain =
      state.covariance * H.transpose() * S.inverse();
  TrackState out;
  out.mean = state.mean + gain * innovation;
  // Joseph form keeps the covariance symmetric positive-definite.
  const Matrix7d IKH = Matrix7d::Identity() - gain * H;
  out.covariance =
      IKH * state.covariance * IKH.transpose() + gain * R * gain.transpose();
  return out;
}

std::vector<TrackedBox> SortTracker::step(const std::vector<Detection>& detections) {
  ++frame_count_;

  for (Track& track : tracks_) {
    track.state = kalman_predict(track.state, params_.kalman);
    track.age += 1;
  }

  // Associate predictions with detections on 1 - IoU cost, then drop pairs
  // below the IoU gate.
  std::vector<int> matched_detection(tracks_.size(), -1);
  std::vector<bool> detection_taken(detections.size(), false);
  if (!tracks_.empty() && !detections.empty()) {
    Eigen::MatrixXd cost(tracks_.size(), detections.size());
    for (std::size_t t = 0; t < tracks_.size(); ++t) {
      const BBox predicted = measurement_to_bbox(tracks_[t].state.mean.head<4>());
      for (std::size_t d = 0; d < detections.size(); ++d) {
        cost(static_cast<int>(t), static_cast<int>(d)) =
            1.0 - iou(predicted, detections[d].bbox);
      }
    }
    for (const auto& [t, d] : hungarian_min_cost(cost)) {
      if (cost(t, d) <= 1.0 - params_.iou_gate) {
        matched_detection[t] = d;
        detection_taken[d] = true;
      }
    }
  }

  std::vector<TrackedBox> output;
  for (std::size_t t = 0; t < tracks_.size(); ++t) {
    Track& track = tracks_[t];
    if (matched_detection[t] >= 0) {
      track.state = kalman_update(track.state, detections[matched_detection[t]].bbox,
                                  params_.kalman);
      track.hits += 1;
      track.misses_since_hit = 0;
    } else {
      track.misses_since_hit += 1;
    }
  }

  for (std::size_t d = 0; d < detections.size(); ++d) {
    if (detection_taken[d]) continue;
    Track track;
    track.id = next_id_++;
    track.state = kalman_init(detections[d].bbox, params_.kalman);
    track.hits = 1;
    track.misses_since_hit = 0;
    track.age = 1;
    tracks_.push_back(track);
    matched_detection.push_back(static_cast<int>(d));
  }

  for (std::size_t t = 0; t < tracks_.size(); ++t) {
    const Track& track = tracks_[t];
    if (matched_detection[t] < 0) continue;
    if (track.hits >= params_.min_hits || frame_count_ <= params_.min_hits) {
      output.push_back(TrackedBox{track.id, measurement_to_bbox(track.state.mean.head<4>()),
                                  matched_detection[t]});
    }
  }

  std::erase_if(tracks_, [this](const Track& track) {
    return track.misses_since_hit > params_.max_age;
  });
  return output;
}

std::vector<TrackedCentroid> FlowTracker::step(
    const std::vector<Eigen::Vector2d>& displacements,
    const std::optional<std::vector<Detection>>& detections) {
  const int frame = frame_count_++;
  if (frame % params_.redetect_every == 0 && detections.has_value()) {
    entries_.clear();
    for (std::size_t d = 0; d < detections->size(); ++d) {
      entries_.push_back(TrackedCentroid{next_id_++, (*detections)[d].bbox.centroid(),
                                         static_cast<int>(d)});
    }
    return entries_;
  }
  if (displacements.size() != entries_.size()) {
    throw Error(ErrorCode::MissingDisplacement,
                "got " + std::to_string(displacements.size()) + " displacements for " +
                    std::to_string(entries_.size()) + " centroids");
  }
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    entries_[i].centroid.u += displacements[i].x();
    entries_[i].centroid.v += displacements[i].y();
  }
  return entries_;
}

}  // namespace rowmap
