#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace clonar {

enum class ErrorCode {
  InvalidArgument,
  // imaging
  EmptyContourSet,
  DegeneratePolygon,
  EmptyMask,
  RectOutOfBounds,
  MalformedImage,
  // lasso
  StrokeTooShort,
  ZoneTooSmall,
  // detection
  BackendUnavailable,
  BackendTimeout,
  MalformedBackendResponse,
  EncodingFailure,
  // generation
  InvalidMesh,
  QueueFull,
  DegenerateSilhouette,
  // meshops
  DegenerateFace,
  NotManifold,
  TargetTooSmall,
  MeshTooLarge,
  MalformedAsset,
  // server
  SessionLimitReached,
  UnknownSession,
  SessionExpired,
  IllegalTransition,
  NotDetectedYet,
  UnknownObject,
  UnknownJob,
  NotReady,
  // evaluation
  OutOfRangeItem,
  InsufficientData,
};

std::string_view toString(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace clonar
