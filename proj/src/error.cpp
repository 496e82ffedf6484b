#include "strata/error.hpp"

namespace strata {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ZeroWeight: return "ZeroWeight";
    case ErrorCode::WeightSumMismatch: return "WeightSumMismatch";
    case ErrorCode::OverlappingCarriers: return "OverlappingCarriers";
    case ErrorCode::AmbientMismatch: return "AmbientMismatch";
    case ErrorCode::InvalidComponent: return "InvalidComponent";
    case ErrorCode::UnsupportedGeometry: return "UnsupportedGeometry";
    case ErrorCode::InfiniteScore: return "InfiniteScore";
    case ErrorCode::BadExponent: return "BadExponent";
    case ErrorCode::DegenerateWeights: return "DegenerateWeights";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::PreconditionViolation: return "PreconditionViolation";
  }
  return "Unknown";
}

}  // namespace strata
