#pragma once

// Adaptation dynamics: stochastic-approximation updates S_k = S_{k-1} +
// gamma_k H_k with feasibility constraints, the adaptive Metropolis and robust
// adaptive Metropolis mean fields, increasingly rare adaptation schedules and
// the waning diagnostic on kernel-change magnitudes D_k.

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace amcmc {

/// Step size rule k -> gamma_k > 0.
class GammaSchedule {
 public:
  /// gamma_k = c * k^(-exponent)
  static GammaSchedule power(double c, double exponent);
  /// 1/k, the adaptive Metropolis schedule.
  static GammaSchedule harmonic() { return power(1.0, 1.0); }
  /// k^(-2/3), the robust adaptive Metropolis default.
  static GammaSchedule ram_default() { return power(1.0, 2.0 / 3.0); }
  static GammaSchedule custom(std::function<double(std::uint64_t)> fn);

  double operator()(std::uint64_t k) const;

  double c() const noexcept { return c_; }
  double exponent() const noexcept { return exponent_; }
  bool is_custom() const noexcept { return static_cast<bool>(fn_); }

 private:
  double c_ = 1.0;
  double exponent_ = 1.0;
  std::function<double(std::uint64_t)> fn_;
};

/// Feasible parameter set. `FiniteIndex` holds integer indices 0..count-1
/// stored in a 1x1 matrix; `EigenBox` holds symmetric d x d matrices with all
/// eigenvalues in the closed interval [a, b]; `Interval` is a closed real
/// interval [a, b] for scalar parameters that need not be positive.
class ParameterSpace {
 public:
  enum class Kind { FiniteIndex, EigenBox, Interval };

  static ParameterSpace finite_index(std::size_t count);
  static ParameterSpace eigenbox(double a, double b, std::size_t dim);
  static ParameterSpace interval(double a, double b);

  Kind kind() const noexcept { return kind_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t count() const noexcept { return count_; }
  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }

  bool contains(const Eigen::MatrixXd& S) const;
  /// Nearest feasible point: eigenvalue clamp for the box, rounding and
  /// clamping for indices.
  Eigen::MatrixXd project(const Eigen::MatrixXd& S) const;

  static constexpr double kSymmetryTol = 1e-10;
  /// Eigenvalue slack for rounding in projected matrices.
  static constexpr double kEigenTol = 1e-12;

 private:
  Kind kind_ = Kind::EigenBox;
  std::size_t dim_ = 1;
  std::size_t count_ = 0;
  double a_ = 0.0;
  double b_ = 0.0;
};

enum class ConstraintMode { Reject, Project };

struct SAState {
  Eigen::MatrixXd S;
  std::uint64_t k = 0;
  GammaSchedule gamma;
  /// Set when the last candidate fell outside the space.
  bool last_infeasible = false;
};

/// One constrained update. Reject mode keeps S (the increment is zeroed);
/// project mode maps the candidate onto the space. Either way
/// ||S_k - S_{k-1}||_F <= gamma_k ||H_k||_F.
SAState sa_step(const SAState& state, const Eigen::MatrixXd& H, const ParameterSpace& space,
                ConstraintMode mode);

/// Same update with an explicit step size (used by random-step schemes).
SAState sa_step_with(const SAState& state, const Eigen::MatrixXd& H, double gamma,
                     const ParameterSpace& space, ConstraintMode mode);

struct AmIncrement {
  Eigen::VectorXd mean;
  Eigen::MatrixXd moment;
};

/// H = (X - mu, X X^T - Sigma).
AmIncrement am_field(const Eigen::VectorXd& X, const Eigen::VectorXd& mu,
                     const Eigen::MatrixXd& Sigma);

/// H = (alpha - alpha_star) S (Z Z^T / ||Z||^2) S^T.
Eigen::MatrixXd ram_field(const Eigen::VectorXd& Z, double alpha, double alpha_star,
                          const Eigen::MatrixXd& S);

inline constexpr double kRamTargetAcceptance = 0.234;

/// Increasingly rare adaptation schedule.
///
/// Deterministic: adaptation times tau_j = n_1 + ... + n_j with increments
/// n_j = max(1, ceil(c log^(1+eps)(j))).
/// Bernoulli: adapt at step k iff U_k <= eta_k with
/// eta_k = min(1, c log^-(1+eps)(k)); the effective step is gamma_k.
class RareSchedule {
 public:
  enum class Kind { DeterministicTimes, BernoulliActivation };

  static RareSchedule deterministic(double c, double epsilon, std::uint64_t horizon,
                                    GammaSchedule gamma = GammaSchedule::harmonic());
  static RareSchedule bernoulli(double c, double epsilon,
                                GammaSchedule gamma = GammaSchedule::harmonic());
  /// eta_k = 1: adapts every step.
  static RareSchedule continuous(GammaSchedule gamma = GammaSchedule::harmonic());

  Kind kind() const noexcept { return kind_; }
  double c() const noexcept { return c_; }
  double epsilon() const noexcept { return epsilon_; }
  const GammaSchedule& gamma() const noexcept { return gamma_; }
  /// True for the continuous schedule (adapts at every step).
  bool always() const noexcept { return always_; }

  /// n_j for the deterministic kind.
  std::uint64_t increment(std::uint64_t j) const;
  /// eta_k for the Bernoulli kind.
  double activation_probability(std::uint64_t k) const;
  /// tau_1 < tau_2 < ... up to the horizon (deterministic kind only).
  std::span<const std::uint64_t> times() const noexcept { return times_; }
  std::uint64_t horizon() const noexcept { return horizon_; }
  bool is_adaptation_time(std::uint64_t k) const;

 private:
  Kind kind_ = Kind::BernoulliActivation;
  double c_ = 1.0;
  double epsilon_ = 0.0;
  bool always_ = false;
  GammaSchedule gamma_;
  std::uint64_t horizon_ = 0;
  std::vector<std::uint64_t> times_;
};

struct AdaptationDecision {
  bool adapt = false;
  double gamma_eff = 0.0;
};

/// `u` is consumed only by the Bernoulli kind.
AdaptationDecision next_adaptation_decision(const RareSchedule& sched, std::uint64_t k,
                                            double u);

/// D_k = 1(k in tau) for k = 1..n.
std::vector<double> indicator_series(const RareSchedule& sched, std::uint64_t n);

struct WaningReport {
  std::vector<double> D_series;
  /// sum_{k<=n} D_k for every n.
  std::vector<double> partial_sums;
  double p = 1.0;
  std::vector<std::uint64_t> checkpoints;
  /// n^-p sum_{k<=n} D_k at each checkpoint.
  std::vector<double> statistic;
  /// sum_{k<=n} D_k / k^p at each checkpoint.
  std::vector<double> weighted_sums;
  /// Mean per-step growth of the weighted sum over the last checkpoint interval.
  double tail_increment = 0.0;
  /// statistic strictly decreases from checkpoint to checkpoint.
  bool decreasing = false;
  /// decreasing, or identically zero.
  bool waning = false;
};

/// Checkpoints are 10^j, j >= first_exponent, followed by n itself.
WaningReport waning_diagnostic(std::vector<double> D_series, double p,
                               unsigned first_exponent = 1);

}  // namespace amcmc
