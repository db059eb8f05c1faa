#include "rowmap/plane_estimation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <unordered_map>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "rowmap/rng.hpp"

namespace rowmap {

namespace {

Plane plane_from_points(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                        const Eigen::Vector3d& c, bool* degenerate) {
  const Eigen::Vector3d ab = b - a;
  const Eigen::Vector3d ac = c - a;
  const Eigen::Vector3d n = ab.cross(ac);
  const double scale = std::max(ab.norm(), ac.norm());
  if (scale < 1e-12 || n.norm() < 1e-9 * scale * scale) {
    *degenerate = true;
    return Plane{};
  }
  *degenerate = false;
  Plane plane;
  plane.normal = n.normalized();
  plane.offset = -plane.normal.dot(a);
  return plane;
}

/// Least-squares plane through a subset of points: centroid plus the smallest
/// principal axis of the subset's covariance.
Plane refit_plane(const std::vector<Eigen::Vector3d>& points, const std::vector<int>& subset) {
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (int idx : subset) centroid += points[idx];
  centroid /= static_cast<double>(subset.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (int idx : subset) {
    const Eigen::Vector3d delta = points[idx] - centroid;
    cov += delta * delta.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
  Plane plane;
  plane.normal = solver.eigenvectors().col(0).normalized();  // smallest eigenvalue first
  plane.offset = -plane.normal.dot(centroid);
  return plane;
}

std::vector<int> select_inliers(const std::vector<Eigen::Vector3d>& points, const Plane& plane,
                                double threshold) {
  std::vector<int> inliers;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (std::abs(plane.signed_distance(points[i])) <= threshold) {
      inliers.push_back(static_cast<int>(i));
    }
  }
  return inliers;
}

struct VoxelKey {
  std::int64_t x, y, z;
  bool operator==(const VoxelKey& o) const { return x == o.x && y == o.y && z == o.z; }
};

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& k) const {
    std::uint64_t h = 1469598103934665603ULL;
    for (std::uint64_t part : {static_cast<std::uint64_t>(k.x), static_cast<std::uint64_t>(k.y),
                               static_cast<std::uint64_t>(k.z)}) {
      h = (h ^ part) * 1099511628211ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

}  // namespace

PlaneFit ransac_plane_fit(const std::vector<Eigen::Vector3d>& points, double threshold,
                          int iterations, std::uint64_t seed) {
  const std::size_t n = points.size();
  if (n < 3) {
    throw Error(ErrorCode::DegenerateInput, "plane fit needs at least 3 points, got " +
                                                std::to_string(n));
  }

  Rng rng(seed);
  Plane best_plane;
  std::size_t best_count = 0;
  bool any_hypothesis = false;
  for (int iter = 0; iter < iterations; ++iter) {
    const std::size_t i = rng.uniform_index(n);
    const std::size_t j = rng.uniform_index(n);
    const std::size_t k = rng.uniform_index(n);
    if (i == j || j == k || i == k) continue;
    bool degenerate = false;
    const Plane candidate = plane_from_points(points[i], points[j], points[k], &degenerate);
    if (degenerate) continue;
    any_hypothesis = true;
    std::size_t count = 0;
    for (const Eigen::Vector3d& p : points) {
      if (std::abs(candidate.signed_distance(p)) <= threshold) ++count;
    }
    // Strict improvement only: ties resolve to the earliest hypothesis.
    if (count > best_count) {
      best_count = count;
      best_plane = candidate;
    }
  }
  if (!any_hypothesis) {
    throw Error(ErrorCode::DegenerateInput, "no non-collinear point triple sampled");
  }
  if (best_count < 3) {
    throw Error(ErrorCode::NoConsensus,
                "best hypothesis supports " + std::to_string(best_count) + " points");
  }

  // Refit and reselect until the inlier set stops moving; keeps the reported
  // inliers consistent with the reported plane.
  std::vector<int> inliers = select_inliers(points, best_plane, threshold);
  Plane plane = best_plane;
  for (int round = 0; round < 5; ++round) {
    const Plane refit = refit_plane(points, inliers);
    std::vector<int> reselected = select_inliers(points, refit, threshold);
    if (reselected.size() < 3) break;  // keep the previous stable fit
    const bool stable = reselected == inliers;
    plane = refit;
    inliers = std::move(reselected);
    if (stable) break;
  }

  double sq_sum = 0.0;
  for (int idx : inliers) {
    const double r = plane.signed_distance(points[idx]);
    sq_sum += r * r;
  }

  PlaneFit fit;
  fit.plane = plane;
  fit.inlier_indices = std::move(inliers);
  fit.rms_residual = std::sqrt(sq_sum / static_cast<double>(fit.inlier_indices.size()));
  return fit;
}

std::vector<Eigen::Vector3d> downsample_uniform(const std::vector<Eigen::Vector3d>& points,
                                                double cell) {
  if (cell <= 0.0) {
    throw Error(ErrorCode::DegenerateInput, "cell size must be positive");
  }
  struct CellStats {
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    int count = 0;
  };
  std::unordered_map<VoxelKey, std::size_t, VoxelKeyHash> index;
  std::vector<CellStats> cells;
  std::vector<VoxelKey> order;  // first-seen emission order
  for (const Eigen::Vector3d& p : points) {
    const VoxelKey key{static_cast<std::int64_t>(std::floor(p.x() / cell)),
                       static_cast<std::int64_t>(std::floor(p.y() / cell)),
                       static_cast<std::int64_t>(std::floor(p.z() / cell))};
    auto [it, inserted] = index.try_emplace(key, cells.size());
    if (inserted) {
      cells.emplace_back();
      order.push_back(key);
    }
    CellStats& stats = cells[it->second];
    stats.sum += p;
    stats.count += 1;
  }
  std::vector<Eigen::Vector3d> out;
  out.reserve(cells.size());
  for (const VoxelKey& key : order) {
    const CellStats& stats = cells[index.at(key)];
    out.push_back(stats.sum / static_cast<double>(stats.count));
  }
  return out;
}

PcaAxes pca_axes(const std::vector<Eigen::Vector3d>& points) {
  if (points.size() < 3) {
    throw Error(ErrorCode::DegenerateInput, "need at least 3 points for principal axes");
  }
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const Eigen::Vector3d& p : points) centroid += p;
  centroid /= static_cast<double>(points.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const Eigen::Vector3d& p : points) {
    const Eigen::Vector3d delta = p - centroid;
    cov += delta * delta.transpose();
  }
  cov /= static_cast<double>(points.size());

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
  if (solver.eigenvalues()(2) <= 0.0) {
    throw Error(ErrorCode::DegenerateInput, "point cloud is a single point");
  }
  PcaAxes out;
  for (int rank = 0; rank < 3; ++rank) {
    const int col = 2 - rank;  // solver is ascending; we report descending
    Eigen::Vector3d axis = solver.eigenvectors().col(col);
    // Deterministic sign: largest-magnitude component positive.
    int arg = 0;
    axis.cwiseAbs().maxCoeff(&arg);
    if (axis(arg) < 0.0) axis = -axis;
    out.axes[rank] = axis;
    out.eigenvalues[rank] = std::max(0.0, solver.eigenvalues()(col));
  }
  return out;
}

Eigen::Vector3d corn_plane_normal(const Eigen::Vector3d& ground_normal,
                                  const Eigen::Vector3d& row_direction) {
  const double alignment = std::abs(ground_normal.normalized().dot(row_direction.normalized()));
  if (alignment >= 0.5) {
    throw Error(ErrorCode::NearParallelInputs,
                "ground normal and row direction align too closely (|dot| = " +
                    std::to_string(alignment) + ")");
  }
  return ground_normal.cross(row_direction).normalized();
}

namespace {

/// One match reduced against a known normal and motion: the homogeneous
/// frame-2 pixel of the matched point is (-d * ray_term + trans_term) as a
/// function of the plane offset d, and the point's frame-1 depth is
/// -d * inv_ray_dot.
struct ReducedMatch {
  Eigen::Vector3d ray_term;
  double inv_ray_dot = 0.0;  // 1 / (n . K^-1 x1)
  double u2 = 0.0;
  double v2 = 0.0;
  // Cleared-denominator equation coefficients: coeff * d = rhs, twice.
  double a_u = 0.0, b_u = 0.0;
  double a_v = 0.0, b_v = 0.0;
};

double depth_at(const ReducedMatch& m, double d) { return -d * m.inv_ray_dot; }

/// Nonlinear reprojection error in pixels; +inf when the candidate offset
/// puts the point at non-positive depth in either frame.
double reprojection_error(const ReducedMatch& m, double d, const Eigen::Vector3d& trans_term) {
  if (depth_at(m, d) <= 0.0) return std::numeric_limits<double>::infinity();
  const Eigen::Vector3d p = -d * m.ray_term + trans_term;
  if (p.z() <= 0.0) return std::numeric_limits<double>::infinity();
  const double du = p.x() / p.z() - m.u2;
  const double dv = p.y() / p.z() - m.v2;
  return std::hypot(du, dv);
}

double refit_offset(const std::vector<ReducedMatch>& reduced, const std::vector<int>& subset,
                    bool* ok) {
  double num = 0.0;
  double den = 0.0;
  for (int idx : subset) {
    const ReducedMatch& m = reduced[idx];
    num += m.a_u * m.b_u + m.a_v * m.b_v;
    den += m.a_u * m.a_u + m.a_v * m.a_v;
  }
  *ok = den > 1e-18;
  return *ok ? num / den : 0.0;
}

std::vector<int> select_match_inliers(const std::vector<ReducedMatch>& reduced, double d,
                                      const Eigen::Vector3d& trans_term, double inlier_px) {
  std::vector<int> inliers;
  for (std::size_t i = 0; i < reduced.size(); ++i) {
    if (reprojection_error(reduced[i], d, trans_term) <= inlier_px) {
      inliers.push_back(static_cast<int>(i));
    }
  }
  return inliers;
}

}  // namespace

CornPlaneEstimate estimate_plane_distance(const std::vector<FeatureMatch>& matches,
                                          const CameraIntrinsics& K, const RigidTransform& T,
                                          const Eigen::Vector3d& plane_normal,
                                          const PlaneDistanceParams& params) {
  if (T.translation.norm() < params.min_translation) {
    throw Error(ErrorCode::InsufficientMotion,
                "translation " + std::to_string(T.translation.norm()) + " m below " +
                    std::to_string(params.min_translation) + " m");
  }
  if (matches.empty()) {
    throw Error(ErrorCode::NoConsensus, "no matches supplied");
  }

  const Eigen::Matrix3d Kmat = K.matrix();
  const Eigen::Matrix3d Kinv = K.inverse_matrix();
  const Eigen::Matrix3d warp = Kmat * T.rotation * Kinv;
  const Eigen::Vector3d trans_term = Kmat * T.translation;

  std::vector<ReducedMatch> reduced;
  reduced.reserve(matches.size());
  for (const FeatureMatch& match : matches) {
    const Eigen::Vector3d x1(match.px1.u, match.px1.v, 1.0);
    const double ray_dot = plane_normal.dot(Kinv * x1);
    ReducedMatch m;
    // A match whose ray is parallel to the plane constrains nothing; keep it
    // with zeroed coefficients so indices stay aligned.
    if (std::abs(ray_dot) > 1e-12) {
      m.inv_ray_dot = 1.0 / ray_dot;
      m.ray_term = (warp * x1) * m.inv_ray_dot;
      m.u2 = match.px2.u;
      m.v2 = match.px2.v;
      m.a_u = m.ray_term.x() - m.u2 * m.ray_term.z();
      m.b_u = trans_term.x() - m.u2 * trans_term.z();
      m.a_v = m.ray_term.y() - m.v2 * m.ray_term.z();
      m.b_v = trans_term.y() - m.v2 * trans_term.z();
    }
    reduced.push_back(m);
  }

  Rng rng(params.seed);
  double best_d = 0.0;
  std::size_t best_count = 0;
  int hypotheses = 0;
  int behind = 0;
  for (int iter = 0; iter < params.iterations; ++iter) {
    const ReducedMatch& m = reduced[rng.uniform_index(reduced.size())];
    const double den = m.a_u * m.a_u + m.a_v * m.a_v;
    if (m.inv_ray_dot == 0.0 || den < 1e-18) continue;
    ++hypotheses;
    const double d = (m.a_u * m.b_u + m.a_v * m.b_v) / den;
    if (depth_at(m, d) <= 0.0) {
      ++behind;
      continue;
    }
    std::size_t count = 0;
    for (const ReducedMatch& other : reduced) {
      if (reprojection_error(other, d, trans_term) <= params.inlier_px) ++count;
    }
    if (count > best_count) {
      best_count = count;
      best_d = d;
    }
  }

  if (best_count == 0) {
    if (hypotheses > 0 && behind == hypotheses) {
      throw Error(ErrorCode::BehindCamera, "every hypothesis put the plane behind the camera");
    }
    throw Error(ErrorCode::NoConsensus, "no hypothesis gathered any inliers");
  }

  // Least-squares refit over the inlier equations, reselecting until stable.
  std::vector<int> inliers = select_match_inliers(reduced, best_d, trans_term, params.inlier_px);
  double d = best_d;
  for (int round = 0; round < 5 && !inliers.empty(); ++round) {
    bool ok = false;
    const double refit = refit_offset(reduced, inliers, &ok);
    if (!ok) break;
    std::vector<int> reselected = select_match_inliers(reduced, refit, trans_term,
                                                       params.inlier_px);
    if (reselected.empty()) break;
    const bool stable = reselected == inliers;
    d = refit;
    inliers = std::move(reselected);
    if (stable) break;
  }
  if (inliers.empty()) {
    throw Error(ErrorCode::NoConsensus, "refit lost every inlier");
  }
  for (int idx : inliers) {
    if (depth_at(reduced[idx], d) <= 0.0) {
      throw Error(ErrorCode::BehindCamera, "refit put an inlier at non-positive depth");
    }
  }

  double sq_sum = 0.0;
  for (int idx : inliers) {
    const double err = reprojection_error(reduced[idx], d, trans_term);
    sq_sum += err * err;
  }

  CornPlaneEstimate estimate;
  estimate.plane.normal = plane_normal;
  estimate.plane.offset = d;
  estimate.inlier_count = static_cast<int>(inliers.size());
  estimate.rms_residual = std::sqrt(sq_sum / static_cast<double>(inliers.size()));
  return estimate;
}

CornPlaneEstimate corridor_plane(const Pixel& vanishing_point, const Pixel& line_pixel,
                                 const CameraIntrinsics& K, const Plane& ground) {
  // The vanishing point backprojects to the row direction; remove any ground
  // normal component so the direction lies in the ground plane.
  const Eigen::Vector3d vp_ray = backproject_ray(K, vanishing_point);
  Eigen::Vector3d row_dir = vp_ray - vp_ray.dot(ground.normal) * ground.normal;
  const double norm = row_dir.norm();
  if (norm < 1e-6) {
    throw Error(ErrorCode::NearParallelInputs,
                "vanishing-point ray is perpendicular to the ground plane");
  }
  row_dir /= norm;

  const Eigen::Vector3d normal = corn_plane_normal(ground.normal, row_dir);
  // A pixel on the corn line hits the ground exactly where the corn plane
  // meets it, which anchors the plane offset.
  const Eigen::Vector3d line_ray = backproject_ray(K, line_pixel);
  const Eigen::Vector3d anchor = intersect_ray_plane(Eigen::Vector3d::Zero(), line_ray, ground);

  CornPlaneEstimate estimate;
  estimate.plane.normal = normal;
  estimate.plane.offset = -normal.dot(anchor);
  estimate.inlier_count = 0;
  estimate.rms_residual = 0.0;
  return estimate;
}

CornPlaneEstimate sideview_plane_distance(const std::vector<Eigen::Vector3d>& points,
                                          const Eigen::Vector3d& plane_normal,
                                          const SideviewParams& params) {
  if (points.empty()) {
    throw Error(ErrorCode::NoConsensus, "no candidate points supplied");
  }
  // Precompute per-point offsets; a hypothesis is just one point's offset.
  std::vector<double> offsets(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    offsets[i] = -plane_normal.dot(points[i]);
  }

  Rng rng(params.seed);
  double best_d = offsets[0];
  std::size_t best_count = 0;
  for (int iter = 0; iter < params.iterations; ++iter) {
    const double d = offsets[rng.uniform_index(offsets.size())];
    std::size_t count = 0;
    for (double o : offsets) {
      if (std::abs(o - d) <= params.inlier_m) ++count;
    }
    if (count > best_count) {
      best_count = count;
      best_d = d;
    }
  }
  if (best_count == 0) {
    // iterations <= 0; fall back to the first point as the hypothesis.
    best_count = 1;
  }

  auto reselect = [&](double d) {
    std::vector<int> inliers;
    for (std::size_t i = 0; i < offsets.size(); ++i) {
      if (std::abs(offsets[i] - d) <= params.inlier_m) inliers.push_back(static_cast<int>(i));
    }
    return inliers;
  };

  std::vector<int> inliers = reselect(best_d);
  double d = best_d;
  for (int round = 0; round < 5 && !inliers.empty(); ++round) {
    double mean = 0.0;
    for (int idx : inliers) mean += offsets[idx];
    mean /= static_cast<double>(inliers.size());
    std::vector<int> reselected = reselect(mean);
    if (reselected.empty()) break;
    const bool stable = reselected == inliers;
    d = mean;
    inliers = std::move(reselected);
    if (stable) break;
  }
  if (inliers.empty()) {
    throw Error(ErrorCode::NoConsensus, "no point within the inlier band");
  }

  double sq_sum = 0.0;
  for (int idx : inliers) {
    const double r = offsets[idx] - d;
    sq_sum += r * r;
  }

  CornPlaneEstimate estimate;
  estimate.plane.normal = plane_normal;
  estimate.plane.offset = d;
  estimate.inlier_count = static_cast<int>(inliers.size());
  estimate.rms_residual = std::sqrt(sq_sum / static_cast<double>(inliers.size()));
  return estimate;
}

}  // namespace rowmap
