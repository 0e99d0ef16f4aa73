#include "lpcg/error.hpp"

namespace lpcg {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMissingCalibKey: return "MissingCalibKey";
    case ErrorCode::kMalformedCalib: return "MalformedCalib";
    case ErrorCode::kMalformedLabelLine: return "MalformedLabelLine";
    case ErrorCode::kMalformedCloud: return "MalformedCloud";
    case ErrorCode::kMalformedDetections: return "MalformedDetections";
    case ErrorCode::kInvalidScore: return "InvalidScore";
    case ErrorCode::kMalformedManifest: return "MalformedManifest";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kMissingDetections: return "MissingDetections";
    case ErrorCode::kEmptyMatchSet: return "EmptyMatchSet";
    case ErrorCode::kFrameSetMismatch: return "FrameSetMismatch";
    case ErrorCode::kPlacementFailed: return "PlacementFailed";
    case ErrorCode::kMissingFile: return "MissingFile";
    case ErrorCode::kDuplicateFrameId: return "DuplicateFrameId";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kIo: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace lpcg
