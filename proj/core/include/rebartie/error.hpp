#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rebartie {

enum class ErrorCode {
  kNearPiRotation,
  kNegativeGamma,
  kNonPositiveDt,
  kDegenerateAxis,
  kSpecInvalid,
  kEmptyCloud,
  kEmptyReference,
  kNoClusters,
  kAllZeroCounts,
  kInvalidParams,
  kNoNodesFound,
  kDegenerateCloud,
  kAmbiguousAxis,
  kNonFiniteScore,
  kEmptyCrop,
  kShapeMismatch,
  kNoCandidateNode,
  kIo,
  kConfig,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every recoverable failure in the library is reported as an Error carrying
// a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code),
        message_(what) {}

  ErrorCode code() const noexcept { return code_; }
  /// Message without the code prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace rebartie
