#pragma once

// Solutions g of the Poisson equation g - P g = phi - pi(phi), their norm and
// Lipschitz bounds, and the asymptotic variance pi(g^2 - (P g)^2).

#include <cstddef>
#include <string>
#include <vector>

#include "amcmc/kernel.hpp"

namespace amcmc {

/// Observable on a finite state space with its pi-mean and oscillation.
class TestFunction {
 public:
  TestFunction(std::vector<double> values, const Distribution& pi);

  /// 1(x = state)
  static TestFunction indicator(std::size_t state, const Distribution& pi);

  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  std::span<const double> centered() const noexcept { return centered_; }
  double operator()(std::size_t x) const noexcept { return values_[x]; }
  double mean_under_pi() const noexcept { return mean_; }
  double osc() const noexcept { return osc_; }

 private:
  std::vector<double> values_;
  std::vector<double> centered_;
  double mean_ = 0.0;
  double osc_ = 0.0;
};

struct PoissonSolution {
  std::vector<double> g;
  /// P g, kept because every consumer of g also needs it.
  std::vector<double> Pg;
  double residual_inf_norm = 0.0;
  /// pi(g)
  double pi_mean = 0.0;
  /// Number of series terms used (0 for the direct solve).
  std::size_t terms = 0;

  double sup_norm() const;
};

/// Check record serialized as {quantity, value, bound, pass, margin}.
struct BoundReport {
  std::string quantity;
  double value = 0.0;
  double bound = 0.0;
  bool pass = false;
  double margin = 0.0;
};

BoundReport make_report(std::string quantity, double value, double bound, double slack = 0.0);

/// Solves (I - P) g = phi_bar with the centering constraint pi(g) = 0.
PoissonSolution solve_poisson_exact(const StochasticMatrix& P, const Distribution& pi,
                                    const TestFunction& phi);

/// Partial sums of sum_k P^k phi_bar, truncated once the certified tail
/// C rho^(K+1) osc(phi) / (1 - rho) drops below `tol`.
PoissonSolution solve_poisson_neumann(const StochasticMatrix& P, const Distribution& pi,
                                      const TestFunction& phi,
                                      const ErgodicityConstants& consts, double tol);

/// Smallest K with C rho^(K+1) osc / (1 - rho) <= tol.
std::size_t neumann_truncation_index(const ErgodicityConstants& consts, double osc, double tol);

/// ||g||_inf against C osc(phi) / (1 - rho).
BoundReport check_poisson_bound(const PoissonSolution& sol, const ErgodicityConstants& consts,
                                const TestFunction& phi);

/// ||g_s - g_s'||_inf against 4 C^2 (1 - rho)^-2 osc(phi) D.
BoundReport check_lipschitz_bound(const PoissonSolution& sol_s, const PoissonSolution& sol_sp,
                                  double D, const ErgodicityConstants& consts,
                                  const TestFunction& phi);

/// Same bound applied to ||P_s g_s - P_s' g_s'||_inf.
BoundReport check_lipschitz_bound_Pg(const PoissonSolution& sol_s,
                                     const PoissonSolution& sol_sp, double D,
                                     const ErgodicityConstants& consts,
                                     const TestFunction& phi);

/// pi(g^2 - (P g)^2), clamped at zero.
double clt_variance(const StochasticMatrix& P, const Distribution& pi, const TestFunction& phi);
double clt_variance(const Distribution& pi, const PoissonSolution& sol);

}  // namespace amcmc
