#pragma once

#include <stdexcept>
#include <string>

namespace rowmap {

enum class ErrorCode {
  NonPositiveDepth,
  RayParallelToPlane,
  IntersectionBehindCamera,
  ZeroOffsetPlane,
  DegenerateInput,
  NoConsensus,
  NearParallelInputs,
  InsufficientMotion,
  BehindCamera,
  MissingDisplacement,
  IndexOutOfRange,
  EmptyMap,
  InsufficientLandmarks,
  NoLinkedTracks,
  SchemaError,
  IoError,
};

const char* to_string(ErrorCode code);

/// Domain error carrying a machine-checkable code plus a human message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rowmap
