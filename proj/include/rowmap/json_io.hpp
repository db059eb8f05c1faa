#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "rowmap/error.hpp"
#include "rowmap/evaluation.hpp"
#include "rowmap/mapping.hpp"
#include "rowmap/pipeline.hpp"
#include "rowmap/simulator.hpp"

// Fixed-size Eigen matrices serialize as flat row-major arrays.
namespace nlohmann {
template <int R, int C, int O, int MR, int MC>
struct adl_serializer<Eigen::Matrix<double, R, C, O, MR, MC>> {
  using Mat = Eigen::Matrix<double, R, C, O, MR, MC>;
  static void to_json(json& j, const Mat& m) {
    j = json::array();
    for (int r = 0; r < m.rows(); ++r) {
      for (int c = 0; c < m.cols(); ++c) j.push_back(m(r, c));
    }
  }
  static void from_json(const json& j, Mat& m) {
    if (!j.is_array() || static_cast<int>(j.size()) != m.rows() * m.cols()) {
      throw rowmap::Error(rowmap::ErrorCode::SchemaError,
                          "expected array of " + std::to_string(m.rows() * m.cols()) +
                              " numbers");
    }
    int k = 0;
    for (int r = 0; r < m.rows(); ++r) {
      for (int c = 0; c < m.cols(); ++c) m(r, c) = j.at(k++).get<double>();
    }
  }
};
}  // namespace nlohmann

namespace rowmap {

// ADL serializers; missing keys fall back to the target's current values, so
// partial config documents override only what they mention.
void to_json(nlohmann::json& j, const Pixel& v);
void from_json(const nlohmann::json& j, Pixel& v);
void to_json(nlohmann::json& j, const CameraIntrinsics& v);
void from_json(const nlohmann::json& j, CameraIntrinsics& v);
void to_json(nlohmann::json& j, const RigidTransform& v);
void from_json(const nlohmann::json& j, RigidTransform& v);
void to_json(nlohmann::json& j, const Plane& v);
void from_json(const nlohmann::json& j, Plane& v);
void to_json(nlohmann::json& j, const BBox& v);
void from_json(const nlohmann::json& j, BBox& v);
void to_json(nlohmann::json& j, const Detection& v);
void from_json(const nlohmann::json& j, Detection& v);
void to_json(nlohmann::json& j, const FeatureMatch& v);
void from_json(const nlohmann::json& j, FeatureMatch& v);

void to_json(nlohmann::json& j, const FieldSpec& v);
void from_json(const nlohmann::json& j, FieldSpec& v);
void to_json(nlohmann::json& j, const CameraSpec& v);
void from_json(const nlohmann::json& j, CameraSpec& v);
void to_json(nlohmann::json& j, const RigSpec& v);
void from_json(const nlohmann::json& j, RigSpec& v);
void to_json(nlohmann::json& j, const WobbleSpec& v);
void from_json(const nlohmann::json& j, WobbleSpec& v);
void to_json(nlohmann::json& j, const TrajectorySpec& v);
void from_json(const nlohmann::json& j, TrajectorySpec& v);
void to_json(nlohmann::json& j, const NoiseSpec& v);
void from_json(const nlohmann::json& j, NoiseSpec& v);
void to_json(nlohmann::json& j, const SamplingSpec& v);
void from_json(const nlohmann::json& j, SamplingSpec& v);
void to_json(nlohmann::json& j, const SimSpec& v);
void from_json(const nlohmann::json& j, SimSpec& v);

void to_json(nlohmann::json& j, const GroundTruth& v);
void from_json(const nlohmann::json& j, GroundTruth& v);
void to_json(nlohmann::json& j, const VanishingPointObs& v);
void from_json(const nlohmann::json& j, VanishingPointObs& v);
void to_json(nlohmann::json& j, const FrameTruth& v);
void from_json(const nlohmann::json& j, FrameTruth& v);
void to_json(nlohmann::json& j, const FrameBundle& v);
void from_json(const nlohmann::json& j, FrameBundle& v);

void to_json(nlohmann::json& j, const StalkLandmark& v);
void from_json(const nlohmann::json& j, StalkLandmark& v);
void to_json(nlohmann::json& j, const SemanticMap& v);
void from_json(const nlohmann::json& j, SemanticMap& v);
void to_json(nlohmann::json& j, const TrackedItem& v);
void from_json(const nlohmann::json& j, TrackedItem& v);
void to_json(nlohmann::json& j, const FrameTracks& v);
void from_json(const nlohmann::json& j, FrameTracks& v);
void to_json(nlohmann::json& j, const GroundFitParams& v);
void from_json(const nlohmann::json& j, GroundFitParams& v);
void to_json(nlohmann::json& j, const PlaneDistanceParams& v);
void from_json(const nlohmann::json& j, PlaneDistanceParams& v);
void to_json(nlohmann::json& j, const SideviewParams& v);
void from_json(const nlohmann::json& j, SideviewParams& v);
void to_json(nlohmann::json& j, const KalmanParams& v);
void from_json(const nlohmann::json& j, KalmanParams& v);
void to_json(nlohmann::json& j, const SortParams& v);
void from_json(const nlohmann::json& j, SortParams& v);
void to_json(nlohmann::json& j, const FlowParams& v);
void from_json(const nlohmann::json& j, FlowParams& v);
void to_json(nlohmann::json& j, const FinalizeParams& v);
void from_json(const nlohmann::json& j, FinalizeParams& v);
void to_json(nlohmann::json& j, const RunConfig& v);
void from_json(const nlohmann::json& j, RunConfig& v);

/// Parsed file, or IoError (unreadable) / SchemaError (invalid JSON).
nlohmann::json read_json_file(const std::string& path);
/// Whole-file write; throws IoError naming the path.
void write_text_file(const std::string& path, const std::string& content);

/// A finished run as stored on disk: the map plus everything needed to
/// re-evaluate it without the original log.
struct RunDocument {
  int format_version = 1;
  PipelineResult result;
  RunConfig config;
  CameraIntrinsics camera;
  std::uint64_t log_seed = 0;
};
void write_run(const RunDocument& doc, const std::string& path, bool with_timestamp = true);
RunDocument read_run(const std::string& path);

/// Ground truth stored next to a log so evaluation can run standalone.
struct SceneDocument {
  int format_version = 1;
  std::uint64_t seed = 0;
  GroundTruth scene;
};
void write_scene(const SceneDocument& doc, const std::string& path, bool with_timestamp = true);
SceneDocument read_scene(const std::string& path);

}  // namespace rowmap
