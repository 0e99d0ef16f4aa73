#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lpcg {

enum class ErrorCode {
  kMissingCalibKey,
  kMalformedCalib,
  kMalformedLabelLine,
  kMalformedCloud,
  kMalformedDetections,
  kInvalidScore,
  kMalformedManifest,
  kEmptyInput,
  kMissingDetections,
  kEmptyMatchSet,
  kFrameSetMismatch,
  kPlacementFailed,
  kMissingFile,
  kDuplicateFrameId,
  kInvalidConfig,
  kIo,
};

std::string_view to_string(ErrorCode code);

// Every failure surfaced by the library carries one of the codes above so
// callers (and the CLI exit-code mapping) can branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lpcg
