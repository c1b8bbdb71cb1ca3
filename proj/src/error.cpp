#include "levelset/error.hpp"

namespace levelset {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptyCloud: return "EmptyCloud";
    case ErrorCode::InvalidPoint: return "InvalidPoint";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::InvalidRadius: return "InvalidRadius";
    case ErrorCode::InvalidDimension: return "InvalidDimension";
    case ErrorCode::InvalidDelta: return "InvalidDelta";
    case ErrorCode::InvalidN: return "InvalidN";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InfeasibleK: return "InfeasibleK";
    case ErrorCode::EmptyRange: return "EmptyRange";
    case ErrorCode::DegenerateSample: return "DegenerateSample";
    case ErrorCode::DegenerateBeta: return "DegenerateBeta";
    case ErrorCode::RadiusOutOfRange: return "RadiusOutOfRange";
    case ErrorCode::EpsOrderViolation: return "EpsOrderViolation";
    case ErrorCode::InternalInvariant: return "InternalInvariant";
    case ErrorCode::EmptyTarget: return "EmptyTarget";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::NonFiniteIntegral: return "NonFiniteIntegral";
    case ErrorCode::RejectionStall: return "RejectionStall";
    case ErrorCode::OffManifold: return "OffManifold";
    case ErrorCode::EmptyLevelSet: return "EmptyLevelSet";
    case ErrorCode::UnsupportedLevel: return "UnsupportedLevel";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::Inconsistent: return "Inconsistent";
  }
  return "Unknown";
}

}  // namespace levelset
