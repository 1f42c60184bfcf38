#include "clonar/error.hpp"

namespace clonar {

std::string_view toString(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptyContourSet: return "EmptyContourSet";
    case ErrorCode::DegeneratePolygon: return "DegeneratePolygon";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::RectOutOfBounds: return "RectOutOfBounds";
    case ErrorCode::MalformedImage: return "MalformedImage";
    case ErrorCode::StrokeTooShort: return "StrokeTooShort";
    case ErrorCode::ZoneTooSmall: return "ZoneTooSmall";
    case ErrorCode::BackendUnavailable: return "BackendUnavailable";
    case ErrorCode::BackendTimeout: return "BackendTimeout";
    case ErrorCode::MalformedBackendResponse: return "MalformedBackendResponse";
    case ErrorCode::EncodingFailure: return "EncodingFailure";
    case ErrorCode::InvalidMesh: return "InvalidMesh";
    case ErrorCode::QueueFull: return "QueueFull";
    case ErrorCode::DegenerateSilhouette: return "DegenerateSilhouette";
    case ErrorCode::DegenerateFace: return "DegenerateFace";
    case ErrorCode::NotManifold: return "NotManifold";
    case ErrorCode::TargetTooSmall: return "TargetTooSmall";
    case ErrorCode::MeshTooLarge: return "MeshTooLarge";
    case ErrorCode::MalformedAsset: return "MalformedAsset";
    case ErrorCode::SessionLimitReached: return "SessionLimitReached";
    case ErrorCode::UnknownSession: return "UnknownSession";
    case ErrorCode::SessionExpired: return "SessionExpired";
    case ErrorCode::IllegalTransition: return "IllegalTransition";
    case ErrorCode::NotDetectedYet: return "NotDetectedYet";
    case ErrorCode::UnknownObject: return "UnknownObject";
    case ErrorCode::UnknownJob: return "UnknownJob";
    case ErrorCode::NotReady: return "NotReady";
    case ErrorCode::OutOfRangeItem: return "OutOfRangeItem";
    case ErrorCode::InsufficientData: return "InsufficientData";
  }
  return "Unknown";
}

}  // namespace clonar
