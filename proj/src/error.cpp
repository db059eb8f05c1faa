#include "rowmap/error.hpp"

namespace rowmap {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveDepth: return "NonPositiveDepth";
    case ErrorCode::RayParallelToPlane: return "RayParallelToPlane";
    case ErrorCode::IntersectionBehindCamera: return "IntersectionBehindCamera";
    case ErrorCode::ZeroOffsetPlane: return "ZeroOffsetPlane";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::NoConsensus: return "NoConsensus";
    case ErrorCode::NearParallelInputs: return "NearParallelInputs";
    case ErrorCode::InsufficientMotion: return "InsufficientMotion";
    case ErrorCode::BehindCamera: return "BehindCamera";
    case ErrorCode::MissingDisplacement: return "MissingDisplacement";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::EmptyMap: return "EmptyMap";
    case ErrorCode::InsufficientLandmarks: return "InsufficientLandmarks";
    case ErrorCode::NoLinkedTracks: return "NoLinkedTracks";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::IoError: return "IoError";
  }
  return "UnknownError";
}

}  // namespace rowmap
