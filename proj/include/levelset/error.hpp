#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace levelset {

enum class ErrorCode {
  EmptyCloud,
  InvalidPoint,
  KTooLarge,
  InvalidRadius,
  InvalidDimension,
  InvalidDelta,
  InvalidN,
  InvalidArgument,
  InfeasibleK,
  EmptyRange,
  DegenerateSample,
  DegenerateBeta,
  RadiusOutOfRange,
  EpsOrderViolation,
  InternalInvariant,
  EmptyTarget,
  EmptySet,
  NonFiniteIntegral,
  RejectionStall,
  OffManifold,
  EmptyLevelSet,
  UnsupportedLevel,
  InvalidSpec,
  ParseError,
  Inconsistent,
};

std::string_view error_code_name(ErrorCode code) noexcept;

/// Failure raised by every levelset operation. The code identifies the
/// contract that was violated; the message carries the details.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace levelset
