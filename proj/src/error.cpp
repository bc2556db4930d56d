#include "amcmc/error.hpp"

namespace amcmc {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidKernel: return "InvalidKernel";
    case ErrorCode::InvalidDistribution: return "InvalidDistribution";
    case ErrorCode::NotIrreducible: return "NotIrreducible";
    case ErrorCode::NonUnique: return "NonUnique";
    case ErrorCode::NotStationary: return "NotStationary";
    case ErrorCode::NotSimultaneouslyErgodic: return "NotSimultaneouslyErgodic";
    case ErrorCode::SingularBeyondCentering: return "SingularBeyondCentering";
    case ErrorCode::NoContraction: return "NoContraction";
    case ErrorCode::NegativeBeyondTolerance: return "NegativeBeyondTolerance";
    case ErrorCode::NonFiniteIncrement: return "NonFiniteIncrement";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::ZeroNoiseVector: return "ZeroNoiseVector";
    case ErrorCode::OutOfRangeD: return "OutOfRangeD";
    case ErrorCode::SchemeEscape: return "SchemeEscape";
    case ErrorCode::MissingSolution: return "MissingSolution";
    case ErrorCode::DegenerateVariance: return "DegenerateVariance";
    case ErrorCode::DobrushinViolation: return "DobrushinViolation";
    case ErrorCode::GridTooLarge: return "GridTooLarge";
    case ErrorCode::NonPositiveDensity: return "NonPositiveDensity";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace amcmc
