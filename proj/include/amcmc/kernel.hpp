#pragma once

// Finite-state Markov kernels: representation, total variation distances,
// Dobrushin coefficients, stationary distributions and simultaneous uniform
// ergodicity certificates.

#include <cstddef>
#include <span>
#include <vector>

namespace amcmc {

inline constexpr double kExactTol = 1e-12;
inline constexpr double kBoundTol = 1e-10;

/// A probability vector on {0, ..., n-1}.
class Distribution {
 public:
  Distribution() = default;
  /// Validates entries >= 0 and sum = 1 within `tol`.
  explicit Distribution(std::vector<double> weights, double tol = kExactTol);

  std::size_t size() const noexcept { return w_.size(); }
  double operator[](std::size_t i) const noexcept { return w_[i]; }
  std::span<const double> weights() const noexcept { return w_; }

  /// pi(f)
  double mean(std::span<const double> f) const;

 private:
  std::vector<double> w_;
};

/// Row-stochastic n x n matrix stored row-major.
class StochasticMatrix {
 public:
  StochasticMatrix() = default;
  /// `rows` is row-major of length n*n. Entries must lie in [0, 1] and each
  /// row must sum to 1 within `tol`.
  StochasticMatrix(std::size_t n, std::vector<double> rows, double tol = kExactTol);
  explicit StochasticMatrix(const std::vector<std::vector<double>>& rows,
                            double tol = kExactTol);

  static StochasticMatrix identity(std::size_t n);
  /// Kernel whose every row equals `pi`.
  static StochasticMatrix independent(const Distribution& pi);

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t x, std::size_t y) const noexcept { return p_[x * n_ + y]; }
  std::span<const double> row(std::size_t x) const noexcept {
    return std::span<const double>(p_).subspan(x * n_, n_);
  }
  std::span<const double> data() const noexcept { return p_; }

  /// Matrix product this * other.
  StochasticMatrix operator*(const StochasticMatrix& other) const;
  StochasticMatrix power(std::size_t k) const;

  /// (1 - w) * this + w * other
  StochasticMatrix mix(const StochasticMatrix& other, double w) const;

  friend bool operator==(const StochasticMatrix&, const StochasticMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> p_;
};

/// Certificate for sup_x d_tv(P_s^k(x,.), pi) <= C rho^k, with the largest
/// one-step Dobrushin coefficient over the family.
struct ErgodicityConstants {
  double C = 1.0;
  double rho = 0.0;
  double beta = 1.0;
  std::size_t horizon = 0;
  /// Power m whose Dobrushin coefficient produced rho.
  std::size_t power = 1;
};

/// Stationary distribution of an irreducible kernel via a direct linear solve.
Distribution stationary_distribution(const StochasticMatrix& P);

/// True iff the transition graph is strongly connected.
bool is_irreducible(const StochasticMatrix& P);

/// ||mu P - mu||_inf
double invariance_residual(const StochasticMatrix& P, std::span<const double> mu);

/// sup_A |mu(A) - nu(A)| = 0.5 * sum |mu_i - nu_i|
double tv_distance(std::span<const double> mu, std::span<const double> nu);
double tv_distance(const Distribution& mu, const Distribution& nu);

/// max_x d_tv(P(x,.), Q(x,.))
double max_tv_between_kernels(const StochasticMatrix& P, const StochasticMatrix& Q);

/// max_{x,y} d_tv(P(x,.), P(y,.))
double dobrushin_coefficient(const StochasticMatrix& P);

/// sup_x d_tv(P(x,.), pi)
double sup_tv_to(const StochasticMatrix& P, const Distribution& pi);

/// e(k) = sup_x d_tv(P^k(x,.), pi) for k = 0..horizon.
std::vector<double> tv_decay_curve(const StochasticMatrix& P, const Distribution& pi,
                                   std::size_t horizon);

/// Fit (C, rho) jointly for a family sharing `pi`. rho is the smallest
/// max_s beta(P_s^m)^(1/m) over m <= horizon; C = max_{s,k} e_s(k) / rho^k.
ErgodicityConstants fit_ergodicity_constants(std::span<const StochasticMatrix> kernels,
                                             const Distribution& pi, std::size_t horizon);

/// (P f)(x) = sum_y P(x,y) f(y)
std::vector<double> kernel_apply(const StochasticMatrix& P, std::span<const double> f);

/// mu P
std::vector<double> left_apply(std::span<const double> mu, const StochasticMatrix& P);

/// Throws NotStationary if ||pi P - pi||_inf > tol.
void require_stationary(const StochasticMatrix& P, const Distribution& pi,
                        double tol = kExactTol);

}  // namespace amcmc
