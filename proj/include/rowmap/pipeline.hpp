#pragma once

#include <cstdint>
#include <vector>

#include "rowmap/mapping.hpp"
#include "rowmap/plane_estimation.hpp"
#include "rowmap/simulator.hpp"
#include "rowmap/tracking.hpp"

namespace rowmap {

/// How the corn-plane distance is recovered each frame.
enum class PlaneSource {
  SfmDistance,  // one-parameter structure-from-motion on side-camera matches
  Corridor,     // vanishing point plus corn-line ray through the front camera
  DepthRansac,  // direct fit to depth samples inside the detection boxes
};

enum class TrackerKind { Sort, Flow };

/// Which of the logged odometry noise profiles to dead-reckon from.
enum class OdomProfile { Base, Front, Side };

struct GroundFitParams {
  double threshold = 0.01;     // inlier distance, meters
  int iterations = 200;
  double cell = 0.05;          // downsampling voxel, meters
  double min_axis_ratio = 1.5; // spread anisotropy needed to trust the row axis
};

struct RunConfig {
  PlaneSource plane_source = PlaneSource::SfmDistance;
  TrackerKind tracker = TrackerKind::Sort;
  OdomProfile odometry = OdomProfile::Base;
  GroundFitParams ground;
  PlaneDistanceParams plane_distance;
  SideviewParams sideview;
  SortParams sort;
  FlowParams flow;
  FinalizeParams finalize;
  /// Distance (pixels, along the image line) from the vanishing point to
  /// the sample used to anchor the near corn line.
  double corridor_line_offset_px = 150.0;
  std::uint64_t seed = 1;  // base seed for the per-frame estimator draws
};

/// One tracker output in one frame, with the detection it came from (when
/// the tracker knows it) so tests can associate tracks with simulated stalks.
struct TrackedItem {
  int track_id = 0;
  Pixel pixel;
  int detection_index = -1;
};

struct FrameTracks {
  int frame = 0;
  std::vector<TrackedItem> items;
};

struct PipelineResult {
  SemanticMap map;
  std::vector<FrameTracks> tracks;     // one entry per frame
  std::vector<RigidTransform> poses;   // dead-reckoned side-camera poses
  int frames_with_plane = 0;
  int frames_total = 0;
};

/// Full run over a log: track stalk boxes, estimate the corn plane per frame,
/// localize tracked stalks against it, and reduce to a semantic map. Frames
/// whose plane estimate fails are tracked but not localized.
PipelineResult run_pipeline(const ObservationLog& log, const RunConfig& config);

}  // namespace rowmap
