#include "amcmc/poisson.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "amcmc/error.hpp"
#include "amcmc/simd.hpp"

namespace amcmc {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double sup_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

double sup_abs_diff(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), ErrorCode::DimensionMismatch, "vector lengths differ");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

void finish(PoissonSolution& sol, const StochasticMatrix& P, const Distribution& pi,
            const TestFunction& phi) {
  sol.Pg = kernel_apply(P, sol.g);
  double r = 0.0;
  for (std::size_t x = 0; x < sol.g.size(); ++x) {
    r = std::max(r, std::fabs(sol.g[x] - sol.Pg[x] - phi.centered()[x]));
  }
  sol.residual_inf_norm = r;
  sol.pi_mean = pi.mean(sol.g);
}

void check_inputs(const StochasticMatrix& P, const Distribution& pi, const TestFunction& phi) {
  require(P.size() == pi.size() && P.size() == phi.size(), ErrorCode::DimensionMismatch,
          "kernel, distribution and test function sizes differ");
  require_stationary(P, pi, kBoundTol);
}

}  // namespace

TestFunction::TestFunction(std::vector<double> values, const Distribution& pi)
    : values_(std::move(values)) {
  require(values_.size() == pi.size(), ErrorCode::DimensionMismatch,
          "test function length differs from distribution");
  for (double v : values_) {
    require(std::isfinite(v), ErrorCode::InvalidDistribution, "non-finite test function value");
  }
  mean_ = pi.mean(values_);
  const auto [lo, hi] = std::minmax_element(values_.begin(), values_.end());
  osc_ = *hi - *lo;
  centered_.resize(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) centered_[i] = values_[i] - mean_;
}

TestFunction TestFunction::indicator(std::size_t state, const Distribution& pi) {
  require(state < pi.size(), ErrorCode::DimensionMismatch, "indicator state out of range");
  std::vector<double> v(pi.size(), 0.0);
  v[state] = 1.0;
  return TestFunction(std::move(v), pi);
}

double PoissonSolution::sup_norm() const { return sup_abs(g); }

BoundReport make_report(std::string quantity, double value, double bound, double slack) {
  BoundReport r;
  r.quantity = std::move(quantity);
  r.value = value;
  r.bound = bound;
  r.margin = bound - value;
  r.pass = value <= bound + slack;
  return r;
}

PoissonSolution solve_poisson_exact(const StochasticMatrix& P, const Distribution& pi,
                                    const TestFunction& phi) {
  check_inputs(P, pi, phi);
  const auto n = static_cast<Eigen::Index>(P.size());

  // (I - P + 1 pi^T) g = phi_bar. Since pi(phi_bar) = 0, the rank-one term
  // enforces pi(g) = 0 and the matrix is nonsingular iff P has a single
  // recurrent class.
  Eigen::Map<const RowMatrix> Pm(P.data().data(), n, n);
  Eigen::Map<const Eigen::RowVectorXd> piv(pi.weights().data(), n);
  Eigen::Map<const Eigen::VectorXd> rhs(phi.centered().data(), n);
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) - Pm;
  A.rowwise() += piv;

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  const double rcond = lu.rcond();
  require(rcond > 1e-13, ErrorCode::SingularBeyondCentering,
          "centered Poisson system is singular (rcond " + std::to_string(rcond) +
              "); kernel is likely reducible");
  Eigen::VectorXd g = lu.solve(rhs);
  for (int it = 0; it < 2; ++it) g += lu.solve(rhs - A * g);

  PoissonSolution sol;
  sol.g.assign(g.data(), g.data() + n);
  finish(sol, P, pi, phi);
  return sol;
}

std::size_t neumann_truncation_index(const ErgodicityConstants& consts, double osc, double tol) {
  require(consts.rho < 1.0, ErrorCode::NoContraction, "rho must be < 1");
  require(tol > 0.0, ErrorCode::InvalidKernel, "tolerance must be positive");
  if (osc == 0.0 || consts.rho == 0.0) return 0;
  // C rho^(K+1) osc / (1 - rho) <= tol
  const double head = consts.C * osc / (1.0 - consts.rho);
  if (head * consts.rho <= tol) return 0;
  const double k1 = std::log(tol / head) / std::log(consts.rho);
  return static_cast<std::size_t>(std::max(0.0, std::ceil(k1 - 1.0)));
}

PoissonSolution solve_poisson_neumann(const StochasticMatrix& P, const Distribution& pi,
                                      const TestFunction& phi,
                                      const ErgodicityConstants& consts, double tol) {
  require(consts.rho < 1.0, ErrorCode::NoContraction,
          "Neumann series needs rho < 1, got " + std::to_string(consts.rho));
  check_inputs(P, pi, phi);
  std::size_t K = neumann_truncation_index(consts, phi.osc(), tol);
  // Guard the ceil against rounding in the logarithms.
  const double head = consts.C * phi.osc() / (1.0 - consts.rho);
  while (head * std::pow(consts.rho, static_cast<double>(K + 1)) > tol) ++K;

  const std::size_t n = P.size();
  PoissonSolution sol;
  sol.g.assign(phi.centered().begin(), phi.centered().end());
  std::vector<double> term(sol.g);
  std::vector<double> next(n);
  for (std::size_t k = 1; k <= K; ++k) {
    simd::matvec(P.data(), n, n, term, next);
    term.swap(next);
    simd::axpy(1.0, term, sol.g);
  }
  sol.terms = K + 1;
  finish(sol, P, pi, phi);
  return sol;
}

BoundReport check_poisson_bound(const PoissonSolution& sol, const ErgodicityConstants& consts,
                                const TestFunction& phi) {
  const double bound = consts.C * phi.osc() / (1.0 - consts.rho);
  return make_report("poisson_sup_norm", sol.sup_norm(), bound, kBoundTol);
}

BoundReport check_lipschitz_bound(const PoissonSolution& sol_s, const PoissonSolution& sol_sp,
                                  double D, const ErgodicityConstants& consts,
                                  const TestFunction& phi) {
  const double one_minus = 1.0 - consts.rho;
  const double bound = 4.0 * consts.C * consts.C / (one_minus * one_minus) * phi.osc() * D;
  return make_report("poisson_lipschitz", sup_abs_diff(sol_s.g, sol_sp.g), bound, kBoundTol);
}

BoundReport check_lipschitz_bound_Pg(const PoissonSolution& sol_s,
                                     const PoissonSolution& sol_sp, double D,
                                     const ErgodicityConstants& consts,
                                     const TestFunction& phi) {
  const double one_minus = 1.0 - consts.rho;
  const double bound = 4.0 * consts.C * consts.C / (one_minus * one_minus) * phi.osc() * D;
  return make_report("poisson_lipschitz_Pg", sup_abs_diff(sol_s.Pg, sol_sp.Pg), bound,
                     kBoundTol);
}

double clt_variance(const Distribution& pi, const PoissonSolution& sol) {
  double v = 0.0;
  for (std::size_t x = 0; x < pi.size(); ++x) {
    v += pi[x] * (sol.g[x] * sol.g[x] - sol.Pg[x] * sol.Pg[x]);
  }
  require(v >= -1e-8, ErrorCode::NegativeBeyondTolerance,
          "asymptotic variance " + std::to_string(v) + " is negative");
  return std::max(v, 0.0);
}

double clt_variance(const StochasticMatrix& P, const Distribution& pi, const TestFunction& phi) {
  return clt_variance(pi, solve_poisson_exact(P, pi, phi));
}

}  // namespace amcmc
