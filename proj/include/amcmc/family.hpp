#pragma once

// Finite kernel families {P_s} sharing a stationary distribution, plus the
// builtin families used by the experiments.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "amcmc/kernel.hpp"
#include "amcmc/rng.hpp"

namespace amcmc {

class CompactTarget;

/// Explicit list of kernels with a common stationary distribution. Members may
/// carry a scalar parameter value (sorted ascending) so continuous adaptation
/// can be snapped to the nearest member, and states may carry a coordinate
/// used by moment-based schemes.
class KernelFamily {
 public:
  KernelFamily(std::vector<StochasticMatrix> kernels, Distribution pi,
               std::vector<double> parameters = {}, std::vector<double> coordinates = {},
               double stationarity_tol = kBoundTol);

  std::size_t size() const noexcept { return kernels_.size(); }
  std::size_t num_states() const noexcept { return pi_.size(); }
  const StochasticMatrix& operator[](std::size_t s) const { return kernels_.at(s); }
  std::span<const StochasticMatrix> kernels() const noexcept { return kernels_; }
  const Distribution& pi() const noexcept { return pi_; }

  /// Parameter of member s (defaults to s itself).
  double parameter(std::size_t s) const;
  std::span<const double> parameters() const noexcept { return parameters_; }
  /// Coordinate of state x (defaults to x itself).
  double coordinate(std::size_t x) const;
  /// Member whose parameter is closest to `value` (ties go to the lower one).
  std::size_t nearest_index(double value) const;

  /// Optional per-member, per-state acceptance probabilities (RWM families).
  void set_acceptance(std::vector<std::vector<double>> acceptance);
  std::optional<double> acceptance(std::size_t s, std::size_t x) const;

 private:
  std::vector<StochasticMatrix> kernels_;
  Distribution pi_;
  std::vector<double> parameters_;
  std::vector<double> coordinates_;
  std::vector<std::vector<double>> acceptance_;
};

namespace families {

/// The two three-state kernels with pi = (1/2, 1/4, 1/4) whose alternation
/// breaks the law of large numbers. State labels 1, 2, 3 map to indices 0, 1, 2.
KernelFamily cyclic_counterexample();

/// Single kernel with every row equal to pi.
KernelFamily independent(const Distribution& pi);

/// (1 - eps) P + eps 1 pi^T for every member; strictly positive rows, Dobrushin
/// coefficient scaled by (1 - eps).
KernelFamily smoothed(const KernelFamily& base, double eps);

/// Members (1 - t_i) P + t_i Q with t_i = i / (count - 1).
KernelFamily convex_mixture(const StochasticMatrix& P, const StochasticMatrix& Q,
                            const Distribution& pi, std::size_t count);

/// Discretized random-walk Metropolis kernels for each proposal variance
/// (1-d targets); parameters are the variances, coordinates the grid points.
KernelFamily rwm_variances(const CompactTarget& target, std::vector<double> variances);

}  // namespace families

/// Random kernels for tests and studies.
namespace random_kernels {

/// Rows with iid Uniform(0,1] weights, normalized: strictly positive, ergodic.
StochasticMatrix positive(std::size_t n, CounterRng& rng);

/// Random positive probability vector.
Distribution distribution(std::size_t n, CounterRng& rng);

/// Metropolized random proposal: pi-reversible with positive off-diagonal
/// entries. `laziness` in [0, 1) mixes in the identity.
StochasticMatrix reversible(const Distribution& pi, CounterRng& rng, double laziness = 0.0);

}  // namespace random_kernels

}  // namespace amcmc
