#include "amcmc/kernel.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>

#include "amcmc/error.hpp"
#include "amcmc/simd.hpp"

namespace amcmc {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void check_same_size(std::size_t a, std::size_t b, const char* what) {
  require(a == b, ErrorCode::DimensionMismatch,
          std::string(what) + ": " + std::to_string(a) + " vs " + std::to_string(b));
}

bool reaches_all(const StochasticMatrix& P, bool reversed) {
  const std::size_t n = P.size();
  std::vector<bool> seen(n, false);
  std::queue<std::size_t> todo;
  seen[0] = true;
  todo.push(0);
  std::size_t count = 1;
  while (!todo.empty()) {
    const std::size_t x = todo.front();
    todo.pop();
    for (std::size_t y = 0; y < n; ++y) {
      const double w = reversed ? P(y, x) : P(x, y);
      if (w > 0.0 && !seen[y]) {
        seen[y] = true;
        ++count;
        todo.push(y);
      }
    }
  }
  return count == n;
}

}  // namespace

Distribution::Distribution(std::vector<double> weights, double tol) : w_(std::move(weights)) {
  require(!w_.empty(), ErrorCode::InvalidDistribution, "empty weight vector");
  double total = 0.0;
  for (double v : w_) {
    require(std::isfinite(v) && v >= 0.0, ErrorCode::InvalidDistribution,
            "negative or non-finite weight");
    total += v;
  }
  require(std::fabs(total - 1.0) <= tol, ErrorCode::InvalidDistribution,
          "weights sum to " + std::to_string(total));
}

double Distribution::mean(std::span<const double> f) const {
  check_same_size(f.size(), w_.size(), "Distribution::mean");
  return simd::dot(w_, f);
}

StochasticMatrix::StochasticMatrix(std::size_t n, std::vector<double> rows, double tol)
    : n_(n), p_(std::move(rows)) {
  require(n_ >= 1, ErrorCode::InvalidKernel, "state count must be >= 1");
  require(p_.size() == n_ * n_, ErrorCode::DimensionMismatch,
          "expected " + std::to_string(n_ * n_) + " entries, got " + std::to_string(p_.size()));
  for (std::size_t x = 0; x < n_; ++x) {
    for (double v : row(x)) {
      require(std::isfinite(v) && v >= 0.0 && v <= 1.0 + tol, ErrorCode::InvalidKernel,
              "entry outside [0, 1] in row " + std::to_string(x));
    }
    const double s = simd::sum(row(x));
    require(std::fabs(s - 1.0) <= tol, ErrorCode::InvalidKernel,
            "row " + std::to_string(x) + " sums to " + std::to_string(s));
  }
}

StochasticMatrix::StochasticMatrix(const std::vector<std::vector<double>>& rows, double tol) {
  std::vector<double> flat;
  flat.reserve(rows.size() * rows.size());
  for (const auto& r : rows) {
    require(r.size() == rows.size(), ErrorCode::DimensionMismatch, "kernel is not square");
    flat.insert(flat.end(), r.begin(), r.end());
  }
  *this = StochasticMatrix(rows.size(), std::move(flat), tol);
}

StochasticMatrix StochasticMatrix::identity(std::size_t n) {
  std::vector<double> p(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) p[i * n + i] = 1.0;
  return StochasticMatrix(n, std::move(p));
}

StochasticMatrix StochasticMatrix::independent(const Distribution& pi) {
  const std::size_t n = pi.size();
  std::vector<double> p;
  p.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    p.insert(p.end(), pi.weights().begin(), pi.weights().end());
  }
  return StochasticMatrix(n, std::move(p));
}

StochasticMatrix StochasticMatrix::operator*(const StochasticMatrix& other) const {
  check_same_size(n_, other.n_, "kernel product");
  std::vector<double> out(n_ * n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    std::span<double> dst(out.data() + i * n_, n_);
    for (std::size_t j = 0; j < n_; ++j) {
      const double w = (*this)(i, j);
      if (w != 0.0) simd::axpy(w, other.row(j), dst);
    }
  }
  return StochasticMatrix(n_, std::move(out), kBoundTol);
}

StochasticMatrix StochasticMatrix::power(std::size_t k) const {
  StochasticMatrix result = identity(n_);
  StochasticMatrix base = *this;
  while (k > 0) {
    if (k & 1U) result = result * base;
    k >>= 1U;
    if (k > 0) base = base * base;
  }
  return result;
}

StochasticMatrix StochasticMatrix::mix(const StochasticMatrix& other, double w) const {
  check_same_size(n_, other.n_, "kernel mixture");
  require(w >= 0.0 && w <= 1.0, ErrorCode::InvalidKernel, "mixture weight outside [0, 1]");
  std::vector<double> out(p_.size());
  for (std::size_t i = 0; i < p_.size(); ++i) out[i] = (1.0 - w) * p_[i] + w * other.p_[i];
  return StochasticMatrix(n_, std::move(out), kBoundTol);
}

bool is_irreducible(const StochasticMatrix& P) {
  return reaches_all(P, false) && reaches_all(P, true);
}

double invariance_residual(const StochasticMatrix& P, std::span<const double> mu) {
  const auto muP = left_apply(mu, P);
  double worst = 0.0;
  for (std::size_t i = 0; i < muP.size(); ++i) worst = std::max(worst, std::fabs(muP[i] - mu[i]));
  return worst;
}

Distribution stationary_distribution(const StochasticMatrix& P) {
  const std::size_t n = P.size();
  if (n == 1) return Distribution({1.0});
  require(is_irreducible(P), ErrorCode::NotIrreducible,
          "transition graph is not strongly connected");

  Eigen::Map<const RowMatrix> Pm(P.data().data(), static_cast<Eigen::Index>(n),
                                 static_cast<Eigen::Index>(n));
  const auto ni = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd A(ni + 1, ni);
  A.topRows(ni) = Pm.transpose() - Eigen::MatrixXd::Identity(ni, ni);
  A.row(ni).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(ni + 1);
  b(ni) = 1.0;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  qr.setThreshold(1e-12);
  require(qr.rank() == ni, ErrorCode::NonUnique, "stationary system is rank deficient");
  Eigen::VectorXd d = qr.solve(b);
  // Two rounds of iterative refinement bring dP - d to rounding level.
  for (int it = 0; it < 2; ++it) d += qr.solve(b - A * d);

  std::vector<double> w(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = std::max(0.0, d(static_cast<Eigen::Index>(i)));
    total += w[i];
  }
  for (double& v : w) v /= total;
  return Distribution(std::move(w));
}

double tv_distance(std::span<const double> mu, std::span<const double> nu) {
  check_same_size(mu.size(), nu.size(), "tv_distance");
  return 0.5 * simd::l1_distance(mu, nu);
}

double tv_distance(const Distribution& mu, const Distribution& nu) {
  return tv_distance(mu.weights(), nu.weights());
}

double max_tv_between_kernels(const StochasticMatrix& P, const StochasticMatrix& Q) {
  check_same_size(P.size(), Q.size(), "max_tv_between_kernels");
  double worst = 0.0;
  for (std::size_t x = 0; x < P.size(); ++x) {
    worst = std::max(worst, 0.5 * simd::l1_distance(P.row(x), Q.row(x)));
  }
  return std::min(worst, 1.0);
}

double dobrushin_coefficient(const StochasticMatrix& P) {
  double worst = 0.0;
  for (std::size_t x = 0; x < P.size(); ++x) {
    for (std::size_t y = x + 1; y < P.size(); ++y) {
      worst = std::max(worst, 0.5 * simd::l1_distance(P.row(x), P.row(y)));
    }
  }
  return std::min(worst, 1.0);
}

double sup_tv_to(const StochasticMatrix& P, const Distribution& pi) {
  check_same_size(P.size(), pi.size(), "sup_tv_to");
  double worst = 0.0;
  for (std::size_t x = 0; x < P.size(); ++x) {
    worst = std::max(worst, 0.5 * simd::l1_distance(P.row(x), pi.weights()));
  }
  return std::min(worst, 1.0);
}

std::vector<double> tv_decay_curve(const StochasticMatrix& P, const Distribution& pi,
                                   std::size_t horizon) {
  std::vector<double> e;
  e.reserve(horizon + 1);
  StochasticMatrix Pk = StochasticMatrix::identity(P.size());
  for (std::size_t k = 0; k <= horizon; ++k) {
    e.push_back(sup_tv_to(Pk, pi));
    if (k < horizon) Pk = Pk * P;
  }
  return e;
}

void require_stationary(const StochasticMatrix& P, const Distribution& pi, double tol) {
  check_same_size(P.size(), pi.size(), "require_stationary");
  const double r = invariance_residual(P, pi.weights());
  require(r <= tol, ErrorCode::NotStationary,
          "||pi P - pi||_inf = " + std::to_string(r) + " exceeds " + std::to_string(tol));
}

ErgodicityConstants fit_ergodicity_constants(std::span<const StochasticMatrix> kernels,
                                             const Distribution& pi, std::size_t horizon) {
  require(!kernels.empty(), ErrorCode::InvalidKernel, "empty kernel family");
  require(horizon >= 2, ErrorCode::InvalidKernel, "horizon must be >= 2");
  for (const auto& P : kernels) require_stationary(P, pi, kBoundTol);

  // e[s][k] and the Dobrushin coefficient of every power P_s^m, m = 1..horizon.
  std::vector<std::vector<double>> e(kernels.size());
  std::vector<double> worst_beta(horizon + 1, 0.0);
  double beta1 = 0.0;
  for (std::size_t s = 0; s < kernels.size(); ++s) {
    const auto& P = kernels[s];
    StochasticMatrix Pk = StochasticMatrix::identity(P.size());
    e[s].reserve(horizon + 1);
    for (std::size_t k = 0; k <= horizon; ++k) {
      e[s].push_back(sup_tv_to(Pk, pi));
      if (k >= 1) worst_beta[k] = std::max(worst_beta[k], dobrushin_coefficient(Pk));
      if (k < horizon) Pk = Pk * P;
    }
    beta1 = std::max(beta1, worst_beta[1]);
  }

  // Values below this floor are rounding noise in P^k and carry no
  // information about the geometric rate.
  constexpr double kNoiseFloor = 1e-12;

  // For any m, e_s(qm + r) <= beta(P_s^m)^q e_s(r) <= rho^(qm + r) * e_s(r) / rho^r,
  // so C taken as the max over k <= horizon certifies every k.
  struct Candidate {
    double rho;
    std::size_t m;
  };
  std::vector<Candidate> candidates;
  for (std::size_t m = 1; m <= horizon; ++m) {
    if (worst_beta[m] < 1.0) {
      candidates.push_back({std::pow(worst_beta[m], 1.0 / static_cast<double>(m)), m});
    }
  }
  require(!candidates.empty(), ErrorCode::NotSimultaneouslyErgodic,
          "no power m <= " + std::to_string(horizon) + " contracts every kernel");
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.rho < b.rho; });

  for (const auto& cand : candidates) {
    double C = 1.0;
    bool finite = true;
    for (const auto& es : e) {
      for (std::size_t k = 0; k <= horizon; ++k) {
        if (k > 0 && es[k] <= kNoiseFloor) continue;
        const double scale = std::pow(cand.rho, static_cast<double>(k));
        if (scale <= 0.0) {
          finite = false;
          break;
        }
        C = std::max(C, es[k] / scale);
      }
      if (!finite) break;
    }
    if (finite && std::isfinite(C)) {
      return ErgodicityConstants{C, cand.rho, beta1, horizon, cand.m};
    }
  }
  fail(ErrorCode::NotSimultaneouslyErgodic, "no finite constant C for any candidate rate");
}

std::vector<double> kernel_apply(const StochasticMatrix& P, std::span<const double> f) {
  check_same_size(f.size(), P.size(), "kernel_apply");
  std::vector<double> out(P.size());
  simd::matvec(P.data(), P.size(), P.size(), f, out);
  return out;
}

std::vector<double> left_apply(std::span<const double> mu, const StochasticMatrix& P) {
  check_same_size(mu.size(), P.size(), "left_apply");
  std::vector<double> out(P.size(), 0.0);
  for (std::size_t x = 0; x < P.size(); ++x) {
    if (mu[x] != 0.0) simd::axpy(mu[x], P.row(x), out);
  }
  return out;
}

}  // namespace amcmc
