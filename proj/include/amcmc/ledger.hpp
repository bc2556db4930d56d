#pragma once

// Adaptive chains on finite kernel families, the exact martingale
// decomposition
//
//   sum_{k<=n} [phi(X_k) - pi(phi)] = M_n + A_n + R_n
//
// with M_n = sum [g_{S_{k-1}}(X_k) - P_{S_{k-1}} g_{S_{k-1}}(X_{k-1})],
//      A_n = sum [g_{S_k}(X_k) - g_{S_{k-1}}(X_k)],
//      R_n = P_{S_0} g_{S_0}(X_0) - P_{S_n} g_{S_n}(X_n),
// and the replication studies built on it.

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "amcmc/family.hpp"
#include "amcmc/poisson.hpp"
#include "amcmc/scheme.hpp"

namespace amcmc {

struct Trajectory {
  /// X_0..X_n
  std::vector<std::size_t> X;
  /// S_0..S_n as family member indices.
  std::vector<std::size_t> S;
  /// Continuous parameter behind S_k (equal to the member parameter for
  /// discrete schemes).
  std::vector<double> params;
  std::uint64_t seed = 0;

  std::size_t length() const noexcept { return X.empty() ? 0 : X.size() - 1; }
};

/// Steps X_{k+1} ~ P_{S_k}(X_k, .) and S_{k+1} from the scheme, one step at a
/// time. Per step, the transition consumes one uniform (inverse CDF over the
/// row) and then the scheme consumes its own draws, in that order.
class ChainDriver {
 public:
  ChainDriver(const KernelFamily& family, const SchemeSpec& scheme, std::size_t x0,
              std::size_t s0, std::uint64_t horizon, std::uint64_t seed);

  void step();
  std::uint64_t k() const noexcept { return k_; }
  std::size_t x() const noexcept { return x_; }
  std::size_t s() const noexcept { return s_; }
  double parameter() const { return scheme_->parameter(); }

 private:
  const KernelFamily& family_;
  std::unique_ptr<FamilyScheme> scheme_;
  CounterRng rng_;
  std::uint64_t k_ = 0;
  std::size_t x_;
  std::size_t s_;
};

/// Index y with cumulative row mass first exceeding u.
std::size_t sample_row(std::span<const double> row, double u) noexcept;

Trajectory run_adaptive_chain(const KernelFamily& family, const SchemeSpec& scheme,
                              std::size_t x0, std::size_t s0, std::size_t n,
                              std::uint64_t seed);

/// Lazily solved (or precomputed) Poisson solutions g_s for each member.
class PoissonOracle {
 public:
  enum class Method { Exact, Neumann };

  PoissonOracle(const KernelFamily& family, TestFunction phi, Method method = Method::Exact,
                double neumann_tol = 1e-12);
  /// Only the listed members are available; others raise MissingSolution.
  static PoissonOracle precomputed(const KernelFamily& family, TestFunction phi,
                                   const std::vector<std::size_t>& members);

  const PoissonSolution& solution(std::size_t s) const;
  const TestFunction& phi() const noexcept { return phi_; }
  const KernelFamily& family() const noexcept { return family_; }
  /// Fitted simultaneous ergodicity constants (computed on first use).
  const ErgodicityConstants& constants(std::size_t horizon = 64) const;

 private:
  const KernelFamily& family_;
  TestFunction phi_;
  Method method_;
  double neumann_tol_;
  bool lazy_ = true;
  mutable std::map<std::size_t, PoissonSolution> cache_;
  mutable std::optional<ErgodicityConstants> consts_;
};

struct DecompositionLedger {
  /// Per-step values, index k-1 for step k.
  std::vector<double> Delta;
  std::vector<double> M;
  std::vector<double> A;
  std::vector<double> R;
  std::vector<double> D;
  std::vector<double> cond_var;
  /// sum_{j<=k} [phi(X_j) - pi(phi)]
  std::vector<double> centered_sum;
  /// P_{S_0} g_{S_0}(X_0) - P_{S_k} g_{S_k}(X_k)
  std::vector<double> R_telescoped;

  std::size_t length() const noexcept { return Delta.size(); }
  /// max_k |M_k + A_k + R_k - centered_sum_k| / k
  double max_identity_error_per_step() const;
  /// max_k |R_k - R_telescoped_k|
  double max_telescoping_error() const;
  double max_abs_delta() const;
};

DecompositionLedger decompose(const Trajectory& traj, const KernelFamily& family,
                              const PoissonOracle& oracle);

struct MartingaleReport {
  /// max_k |E[Delta_k | F_{k-1}]|, computed exactly over the row.
  double max_abs_conditional_mean = 0.0;
  /// max_k |E[Delta_k^2 | F_{k-1}] - (P g^2 - (P g)^2)(X_{k-1})|
  double max_conditional_variance_error = 0.0;
  std::size_t steps = 0;
};

MartingaleReport martingale_check(const Trajectory& traj, const DecompositionLedger& ledger,
                                  const KernelFamily& family, const PoissonOracle& oracle);

/// Chain configuration shared by the studies.
struct ChainConfig {
  const KernelFamily* family = nullptr;
  SchemeSpec scheme;
  std::size_t x0 = 0;
  std::size_t s0 = 0;
  const TestFunction* phi = nullptr;
};

struct LlnTable {
  std::vector<std::uint64_t> n_grid;
  std::vector<std::uint64_t> seeds;
  /// errors[i][j]: seed j at n_grid[i], |n^-1 sum phi(X_k) - pi(phi)|.
  std::vector<std::vector<double>> errors;
  std::vector<double> median_error;
  /// Least-squares slope of log median error against log n.
  double loglog_slope = 0.0;
  /// Median error at the largest n is below that at the smallest n.
  bool decreasing = false;
};

LlnTable lln_study(const ChainConfig& config, const std::vector<std::uint64_t>& n_grid,
                   const std::vector<std::uint64_t>& seeds, unsigned threads = 1);

struct CltSummary {
  std::vector<double> replicates;
  double empirical_var = 0.0;
  /// Mean over replications of clt_variance at the terminal member; equals
  /// clt_variance(P_{s_inf}) when the limit is deterministic.
  double sigma2_oracle = 0.0;
  double ratio = 0.0;
  /// Kolmogorov-Smirnov distance of replicates / sqrt(sigma2_oracle) from N(0, 1).
  double ks_statistic = 0.0;
  /// Terminal member of each replication.
  std::vector<std::size_t> terminal_members;
};

/// Replicates sqrt(n) (n^-1 sum phi(X_k) - pi(phi)) over chains seeded by
/// derive_seed(root_seed, r).
CltSummary clt_study(const ChainConfig& config, std::size_t n, std::size_t replications,
                     std::uint64_t root_seed, unsigned threads = 1);

struct AnBoundReport {
  double beta = 0.0;
  double C_prime = 0.0;
  /// (C')^2 [1 + 2 beta / (1 - beta)]
  double bound = 0.0;
  /// Monte Carlo E[A_n^2] / n, the normalization under which the bound applies.
  double estimate = 0.0;
  double std_error = 0.0;
  /// Monte Carlo E[A_n^2] without normalization.
  double raw_second_moment = 0.0;
  std::size_t n = 0;
  std::size_t replications = 0;
  bool pass = false;
};

/// Fixed schedule s_k = sequence[k mod len]; requires every member to have a
/// Dobrushin coefficient below one.
AnBoundReport an_bound_check(const std::vector<std::size_t>& sequence,
                             const KernelFamily& family, const TestFunction& phi, std::size_t n,
                             std::size_t replications, std::uint64_t root_seed,
                             std::size_t x0 = 0, unsigned threads = 1);

}  // namespace amcmc
