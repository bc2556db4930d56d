#pragma once

// Adaptation schemes driving the member index S_k of a finite KernelFamily.
//
// Continuous schemes (AM, RAM, mean tracking) keep a real-valued parameter
// updated by stochastic approximation and publish the family member whose
// parameter is nearest to it, so the Poisson oracle stays exact.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "amcmc/adaptation.hpp"
#include "amcmc/family.hpp"
#include "amcmc/rng.hpp"

namespace amcmc {

struct ConstraintSpec {
  double a = 0.0;
  double b = 1.0;
  ConstraintMode mode = ConstraintMode::Project;
};

struct RareSpec {
  RareSchedule::Kind kind = RareSchedule::Kind::DeterministicTimes;
  double c = 2.0;
  double epsilon = 0.1;
};

struct SchemeSpec {
  enum class Kind {
    /// S_k = s0.
    Constant,
    /// S_k = sequence[k mod len] for k >= 1.
    Cyclic,
    /// Adaptive Metropolis: running mean and second moment of the state
    /// coordinate; proposal variance scale * (m2 - mu^2) clamped to [a, b].
    Am,
    /// Robust adaptive Metropolis on the proposal variance, driven by the
    /// acceptance probability at the previous state.
    Ram,
    /// Mean tracking t_k = t_{k-1} + gamma_k (coordinate(X_k) - t_{k-1}).
    /// Unconstrained unless a constraint is given.
    Custom,
  };

  Kind kind = Kind::Constant;
  std::vector<std::size_t> sequence;
  /// gamma_k = gamma_c * k^(-gamma_exponent); unset means the scheme default
  /// (1/k for AM and custom, k^(-2/3) for RAM).
  std::optional<double> gamma_c;
  std::optional<double> gamma_exponent;
  std::optional<ConstraintSpec> constraint;
  std::optional<RareSpec> rare;
  double alpha_star = kRamTargetAcceptance;
  /// Proposal scaling for AM (2.38^2 / d with d = 1).
  double am_scale = 2.38 * 2.38;

  GammaSchedule gamma_schedule() const;
};

SchemeSpec::Kind parse_scheme_kind(const std::string& name);
std::string to_string(SchemeSpec::Kind kind);

struct StepContext {
  /// Index of the step just completed; X_k has been drawn.
  std::uint64_t k;
  std::size_t x_prev;
  std::size_t x;
  std::size_t s_prev;
};

class FamilyScheme {
 public:
  virtual ~FamilyScheme() = default;
  /// Returns S_k. Any random draws come from `rng` after the transition draw.
  virtual std::size_t update(const StepContext& ctx, CounterRng& rng) = 0;
  /// Current continuous parameter (member parameter for discrete schemes).
  virtual double parameter() const = 0;
};

/// Builds the runtime scheme for a family starting at member s0. Horizon is
/// the longest run the scheme must support (used by deterministic rare
/// schedules).
std::unique_ptr<FamilyScheme> make_scheme(const SchemeSpec& spec, const KernelFamily& family,
                                          std::size_t s0, std::uint64_t horizon);

}  // namespace amcmc
