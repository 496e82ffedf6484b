#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace strata {

enum class ErrorCode {
  ZeroWeight,
  WeightSumMismatch,
  OverlappingCarriers,
  AmbientMismatch,
  InvalidComponent,
  UnsupportedGeometry,
  InfiniteScore,
  BadExponent,
  DegenerateWeights,
  TooLarge,
  ConfigError,
  PreconditionViolation,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) throw Error(code, what);
}

}  // namespace strata
