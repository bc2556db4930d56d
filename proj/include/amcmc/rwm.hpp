#pragma once

// Gaussian random-walk Metropolis on a compact box, in two lanes: an exact
// lattice discretization producing a StochasticMatrix for the oracle, and a
// continuous sampler used for adaptation on the real state space.

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "amcmc/kernel.hpp"
#include "amcmc/rng.hpp"

namespace amcmc {

/// Target on a box in R^d, discretized at cell centres of an m^d grid for the
/// exact lane. The density must be strictly positive on the box.
class CompactTarget {
 public:
  using LogDensity = std::function<double(std::span<const double>)>;

  CompactTarget(std::string name, std::vector<double> lower, std::vector<double> upper,
                std::size_t m, LogDensity log_density);

  static CompactTarget uniform(std::vector<double> lower, std::vector<double> upper,
                               std::size_t m);
  /// Independent N(mean, sd^2) coordinates restricted to the box.
  static CompactTarget truncated_gaussian(std::vector<double> lower, std::vector<double> upper,
                                          std::size_t m, double mean = 0.0, double sd = 1.0);
  /// Equal mixture of N(-offset 1, sd^2 I) and N(+offset 1, sd^2 I).
  static CompactTarget bimodal_mixture(std::vector<double> lower, std::vector<double> upper,
                                       std::size_t m, double offset = 1.5, double sd = 0.6);
  /// Piecewise-constant density given per grid cell (row-major over axes).
  static CompactTarget table(std::vector<double> lower, std::vector<double> upper,
                             std::size_t m, std::vector<double> density);

  const std::string& name() const noexcept { return name_; }
  std::size_t dim() const noexcept { return lower_.size(); }
  std::size_t resolution() const noexcept { return m_; }
  std::size_t num_states() const noexcept;
  std::span<const double> lower() const noexcept { return lower_; }
  std::span<const double> upper() const noexcept { return upper_; }
  /// Grid spacing along axis i.
  double spacing(std::size_t axis) const noexcept;

  bool in_box(std::span<const double> x) const noexcept;
  /// -inf outside the box.
  double log_density(std::span<const double> x) const;

  std::vector<double> grid_point(std::size_t state) const;
  /// Normalized density at grid points.
  Distribution grid_distribution() const;

 private:
  std::string name_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::size_t m_;
  LogDensity log_density_;
};

/// Proposal covariance with a certified eigenvalue range.
class RwmParameter {
 public:
  /// Certifies the eigenvalues of `sigma` lie in [a, b].
  RwmParameter(Eigen::MatrixXd sigma, double a, double b);
  /// Certified range is the exact eigenvalue range of `sigma`.
  explicit RwmParameter(Eigen::MatrixXd sigma);
  static RwmParameter scalar(double variance) {
    return RwmParameter(Eigen::MatrixXd::Constant(1, 1, variance));
  }

  const Eigen::MatrixXd& sigma() const noexcept { return sigma_; }
  const Eigen::MatrixXd& cholesky() const noexcept { return chol_; }
  double min_eigenvalue() const noexcept { return a_; }
  double max_eigenvalue() const noexcept { return b_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(sigma_.rows()); }

 private:
  Eigen::MatrixXd sigma_;
  Eigen::MatrixXd chol_;
  double a_;
  double b_;
};

struct DiscreteRwm {
  StochasticMatrix kernel;
  Distribution pi;
  /// Probability that a proposal from state x is accepted (includes the
  /// zero-offset proposal, which is always accepted).
  std::vector<double> acceptance;

  double mean_acceptance() const;
};

inline constexpr std::size_t kDefaultGridCap = 10000;

/// Lattice proposal q(x, y) = w(y - x) / Z with w the Gaussian kernel of
/// covariance Sigma and Z its sum over the whole infinite lattice; proposals
/// off the grid are rejected. q is symmetric, so Metropolis acceptance
/// min{1, pi(y)/pi(x)} gives exact pi-reversibility.
DiscreteRwm build_discrete_rwm_detailed(const CompactTarget& target, const RwmParameter& sigma,
                                        std::size_t max_states = kDefaultGridCap);
StochasticMatrix build_discrete_rwm(const CompactTarget& target, const RwmParameter& sigma,
                                    std::size_t max_states = kDefaultGridCap);

/// max |pi_i P_ij - pi_j P_ji|
double detailed_balance_residual(const StochasticMatrix& P, const Distribution& pi);

struct RwmMove {
  std::vector<double> proposal;
  std::vector<double> next;
  double alpha = 0.0;
  Eigen::VectorXd Z;
  bool accepted = false;
};

/// One continuous-lane step. Draws d normals for Z, then one uniform for the
/// accept decision. Out-of-box proposals have alpha = 0.
RwmMove rwm_propose_accept(std::span<const double> x, const RwmParameter& sigma,
                           const CompactTarget& target, CounterRng& rng);

/// Runs the continuous lane with fixed Sigma for n steps and returns the
/// fraction of accepted proposals.
double continuous_acceptance_rate(const CompactTarget& target, const RwmParameter& sigma,
                                  std::vector<double> x0, std::size_t n, std::uint64_t seed);

/// min(1, L ||Sigma - Sigma_prev||_F)
double lipschitz_surrogate(const RwmParameter& s, const RwmParameter& s_prev, double L);

/// Largest ratio max_tv(P_i, P_j) / ||Sigma_i - Sigma_j||_F over all pairs.
double fit_lipschitz_constant(const CompactTarget& target, std::span<const RwmParameter> grid,
                              std::size_t max_states = kDefaultGridCap);

}  // namespace amcmc
