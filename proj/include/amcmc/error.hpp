#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace amcmc {

/// Failure categories raised by the library. Each maps to one precondition or
/// numerical check that can fail at runtime.
enum class ErrorCode {
  DimensionMismatch,
  InvalidKernel,
  InvalidDistribution,
  NotIrreducible,
  NonUnique,
  NotStationary,
  NotSimultaneouslyErgodic,
  SingularBeyondCentering,
  NoContraction,
  NegativeBeyondTolerance,
  NonFiniteIncrement,
  ShapeMismatch,
  ZeroNoiseVector,
  OutOfRangeD,
  SchemeEscape,
  MissingSolution,
  DegenerateVariance,
  DobrushinViolation,
  GridTooLarge,
  NonPositiveDensity,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace amcmc
