#include "amcmc/ledger.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "amcmc/error.hpp"
#include "amcmc/parallel.hpp"

namespace amcmc {

std::size_t sample_row(std::span<const double> row, double u) noexcept {
  double cum = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t y = 0; y < row.size(); ++y) {
    if (row[y] <= 0.0) continue;
    cum += row[y];
    last_positive = y;
    if (u < cum) return y;
  }
  // Rounding left u above the accumulated mass.
  return last_positive;
}

ChainDriver::ChainDriver(const KernelFamily& family, const SchemeSpec& scheme, std::size_t x0,
                         std::size_t s0, std::uint64_t horizon, std::uint64_t seed)
    : family_(family),
      scheme_(make_scheme(scheme, family, s0, horizon)),
      rng_(seed),
      x_(x0),
      s_(s0) {
  if (x0 >= family.num_states()) throw std::invalid_argument("x0 out of range");
}

void ChainDriver::step() {
  const std::size_t x_prev = x_;
  const std::size_t s_prev = s_;
  x_ = sample_row(family_[s_prev].row(x_prev), rng_.uniform());
  ++k_;
  s_ = scheme_->update(StepContext{k_, x_prev, x_, s_prev}, rng_);
}

Trajectory run_adaptive_chain(const KernelFamily& family, const SchemeSpec& scheme,
                              std::size_t x0, std::size_t s0, std::size_t n,
                              std::uint64_t seed) {
  ChainDriver driver(family, scheme, x0, s0, n, seed);
  Trajectory t;
  t.seed = seed;
  t.X.reserve(n + 1);
  t.S.reserve(n + 1);
  t.params.reserve(n + 1);
  t.X.push_back(x0);
  t.S.push_back(s0);
  t.params.push_back(driver.parameter());
  for (std::size_t k = 0; k < n; ++k) {
    driver.step();
    t.X.push_back(driver.x());
    t.S.push_back(driver.s());
    t.params.push_back(driver.parameter());
  }
  return t;
}

PoissonOracle::PoissonOracle(const KernelFamily& family, TestFunction phi, Method method,
                             double neumann_tol)
    : family_(family), phi_(std::move(phi)), method_(method), neumann_tol_(neumann_tol) {
  require(phi_.size() == family.num_states(), ErrorCode::DimensionMismatch,
          "test function length differs from state count");
}

PoissonOracle PoissonOracle::precomputed(const KernelFamily& family, TestFunction phi,
                                         const std::vector<std::size_t>& members) {
  PoissonOracle oracle(family, std::move(phi));
  for (std::size_t s : members) oracle.solution(s);
  oracle.lazy_ = false;
  return oracle;
}

const ErgodicityConstants& PoissonOracle::constants(std::size_t horizon) const {
  if (!consts_) consts_ = fit_ergodicity_constants(family_.kernels(), family_.pi(), horizon);
  return *consts_;
}

const PoissonSolution& PoissonOracle::solution(std::size_t s) const {
  if (auto it = cache_.find(s); it != cache_.end()) return it->second;
  require(lazy_, ErrorCode::MissingSolution,
          "no Poisson solution for family member " + std::to_string(s));
  if (s >= family_.size()) throw std::out_of_range("family member out of range");
  PoissonSolution sol =
      method_ == Method::Exact
          ? solve_poisson_exact(family_[s], family_.pi(), phi_)
          : solve_poisson_neumann(family_[s], family_.pi(), phi_, constants(), neumann_tol_);
  return cache_.emplace(s, std::move(sol)).first->second;
}

double DecompositionLedger::max_identity_error_per_step() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < length(); ++i) {
    const double err = std::fabs(M[i] + A[i] + R[i] - centered_sum[i]);
    worst = std::max(worst, err / static_cast<double>(i + 1));
  }
  return worst;
}

double DecompositionLedger::max_telescoping_error() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < length(); ++i) {
    worst = std::max(worst, std::fabs(R[i] - R_telescoped[i]));
  }
  return worst;
}

double DecompositionLedger::max_abs_delta() const {
  double worst = 0.0;
  for (double d : Delta) worst = std::max(worst, std::fabs(d));
  return worst;
}

namespace {

/// (P g^2)(x) - ((P g)(x))^2 for member s.
double conditional_variance(const StochasticMatrix& P, const PoissonSolution& sol,
                            std::size_t x) {
  const auto row = P.row(x);
  double m2 = 0.0;
  for (std::size_t y = 0; y < row.size(); ++y) m2 += row[y] * sol.g[y] * sol.g[y];
  return m2 - sol.Pg[x] * sol.Pg[x];
}

}  // namespace

DecompositionLedger decompose(const Trajectory& traj, const KernelFamily& family,
                              const PoissonOracle& oracle) {
  require(traj.X.size() == traj.S.size() && !traj.X.empty(), ErrorCode::DimensionMismatch,
          "trajectory X and S lengths differ");
  const std::size_t n = traj.length();
  const TestFunction& phi = oracle.phi();
  const double mean = phi.mean_under_pi();

  DecompositionLedger L;
  for (auto* v : {&L.Delta, &L.M, &L.A, &L.R, &L.D, &L.cond_var, &L.centered_sum,
                  &L.R_telescoped}) {
    v->reserve(n);
  }

  std::map<std::pair<std::size_t, std::size_t>, double> tv_cache;
  auto kernel_change = [&](std::size_t a, std::size_t b) {
    if (a == b) return 0.0;
    const auto key = std::minmax(a, b);
    auto it = tv_cache.find(key);
    if (it == tv_cache.end()) {
      it = tv_cache.emplace(key, max_tv_between_kernels(family[a], family[b])).first;
    }
    return it->second;
  };

  const double R0 = oracle.solution(traj.S[0]).Pg[traj.X[0]];
  double M = 0.0, A = 0.0, R = 0.0, lhs = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    const std::size_t x_prev = traj.X[k - 1], x = traj.X[k];
    const std::size_t s_prev = traj.S[k - 1], s = traj.S[k];
    const PoissonSolution& prev = oracle.solution(s_prev);
    const PoissonSolution& cur = oracle.solution(s);

    const double delta = prev.g[x] - prev.Pg[x_prev];
    M += delta;
    A += cur.g[x] - prev.g[x];
    R += prev.Pg[x_prev] - cur.Pg[x];
    lhs += phi(x) - mean;

    L.Delta.push_back(delta);
    L.M.push_back(M);
    L.A.push_back(A);
    L.R.push_back(R);
    L.D.push_back(kernel_change(s, s_prev));
    L.cond_var.push_back(conditional_variance(family[s_prev], prev, x_prev));
    L.centered_sum.push_back(lhs);
    L.R_telescoped.push_back(R0 - cur.Pg[x]);
  }
  return L;
}

MartingaleReport martingale_check(const Trajectory& traj, const DecompositionLedger& ledger,
                                  const KernelFamily& family, const PoissonOracle& oracle) {
  require(ledger.length() == traj.length(), ErrorCode::DimensionMismatch,
          "ledger and trajectory lengths differ");
  MartingaleReport rep;
  rep.steps = traj.length();
  // The conditional moments depend on (S_{k-1}, X_{k-1}) only.
  std::map<std::pair<std::size_t, std::size_t>, std::pair<double, double>> moments;
  for (std::size_t k = 1; k <= traj.length(); ++k) {
    const std::size_t s = traj.S[k - 1], x = traj.X[k - 1];
    auto it = moments.find({s, x});
    if (it == moments.end()) {
      const PoissonSolution& sol = oracle.solution(s);
      const auto row = family[s].row(x);
      double m1 = 0.0, m2 = 0.0;
      for (std::size_t y = 0; y < row.size(); ++y) {
        const double d = sol.g[y] - sol.Pg[x];
        m1 += row[y] * d;
        m2 += row[y] * d * d;
      }
      it = moments.emplace(std::make_pair(s, x), std::make_pair(m1, m2)).first;
    }
    const auto [m1, m2] = it->second;
    rep.max_abs_conditional_mean = std::max(rep.max_abs_conditional_mean, std::fabs(m1));
    rep.max_conditional_variance_error =
        std::max(rep.max_conditional_variance_error, std::fabs(m2 - ledger.cond_var[k - 1]));
  }
  return rep;
}

namespace {

void require_config(const ChainConfig& c) {
  if (c.family == nullptr || c.phi == nullptr) {
    throw std::invalid_argument("chain config needs a family and a test function");
  }
  require(c.phi->size() == c.family->num_states(), ErrorCode::DimensionMismatch,
          "test function length differs from state count");
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    m = (m + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid))) / 2.0;
  }
  return m;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

LlnTable lln_study(const ChainConfig& config, const std::vector<std::uint64_t>& n_grid,
                   const std::vector<std::uint64_t>& seeds, unsigned threads) {
  require_config(config);
  if (n_grid.empty() || seeds.empty()) throw std::invalid_argument("empty n grid or seed list");
  std::vector<std::uint64_t> grid = n_grid;
  std::sort(grid.begin(), grid.end());
  if (grid.front() == 0) throw std::invalid_argument("n grid entries must be positive");

  LlnTable table;
  table.n_grid = grid;
  table.seeds = seeds;
  table.errors.assign(grid.size(), std::vector<double>(seeds.size(), 0.0));
  const double mean = config.phi->mean_under_pi();

  parallel_for(seeds.size(), threads, [&](std::size_t j) {
    ChainDriver driver(*config.family, config.scheme, config.x0, config.s0, grid.back(),
                       seeds[j]);
    double sum = 0.0;
    std::size_t next = 0;
    for (std::uint64_t k = 1; k <= grid.back(); ++k) {
      driver.step();
      sum += (*config.phi)(driver.x());
      while (next < grid.size() && grid[next] == k) {
        table.errors[next][j] = std::fabs(sum / static_cast<double>(k) - mean);
        ++next;
      }
    }
  });

  for (const auto& row : table.errors) table.median_error.push_back(median(row));

  // Least squares on the points with a positive median.
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (table.median_error[i] > 0.0) {
      lx.push_back(std::log(static_cast<double>(grid[i])));
      ly.push_back(std::log(table.median_error[i]));
    }
  }
  if (lx.size() >= 2) {
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(lx.size());
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / static_cast<double>(ly.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sxy += (lx[i] - mx) * (ly[i] - my);
      sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    table.loglog_slope = sxx > 0.0 ? sxy / sxx : 0.0;
  }
  table.decreasing = table.median_error.back() < table.median_error.front();
  return table;
}

CltSummary clt_study(const ChainConfig& config, std::size_t n, std::size_t replications,
                     std::uint64_t root_seed, unsigned threads) {
  require_config(config);
  if (n == 0 || replications < 2) {
    throw std::invalid_argument("clt study needs n >= 1 and at least two replications");
  }
  const double mean = config.phi->mean_under_pi();
  const double root_n = std::sqrt(static_cast<double>(n));

  CltSummary out;
  out.replicates.assign(replications, 0.0);
  out.terminal_members.assign(replications, 0);
  parallel_for(replications, threads, [&](std::size_t r) {
    ChainDriver driver(*config.family, config.scheme, config.x0, config.s0, n,
                       derive_seed(root_seed, r));
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      driver.step();
      sum += (*config.phi)(driver.x());
    }
    out.replicates[r] = root_n * (sum / static_cast<double>(n) - mean);
    out.terminal_members[r] = driver.s();
  });

  const double R = static_cast<double>(replications);
  const double rep_mean = std::accumulate(out.replicates.begin(), out.replicates.end(), 0.0) / R;
  double ss = 0.0;
  for (double v : out.replicates) ss += (v - rep_mean) * (v - rep_mean);
  out.empirical_var = ss / (R - 1.0);

  std::map<std::size_t, double> sigma2;
  double total = 0.0;
  for (std::size_t s : out.terminal_members) {
    auto it = sigma2.find(s);
    if (it == sigma2.end()) {
      it = sigma2.emplace(s, clt_variance((*config.family)[s], config.family->pi(), *config.phi))
               .first;
    }
    total += it->second;
  }
  out.sigma2_oracle = total / R;

  constexpr double kDegenerateTol = 1e-12;
  if (out.sigma2_oracle <= kDegenerateTol) {
    require(out.empirical_var <= kDegenerateTol, ErrorCode::DegenerateVariance,
            "oracle variance is zero but the empirical variance is " +
                std::to_string(out.empirical_var));
    out.ratio = out.empirical_var == 0.0 ? 1.0 : 0.0;
    out.ks_statistic = 0.0;
    return out;
  }
  out.ratio = out.empirical_var / out.sigma2_oracle;

  std::vector<double> z = out.replicates;
  const double sd = std::sqrt(out.sigma2_oracle);
  for (double& v : z) v /= sd;
  std::sort(z.begin(), z.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double F = normal_cdf(z[i]);
    ks = std::max({ks, static_cast<double>(i + 1) / R - F, F - static_cast<double>(i) / R});
  }
  out.ks_statistic = ks;
  return out;
}

AnBoundReport an_bound_check(const std::vector<std::size_t>& sequence,
                             const KernelFamily& family, const TestFunction& phi, std::size_t n,
                             std::size_t replications, std::uint64_t root_seed, std::size_t x0,
                             unsigned threads) {
  if (sequence.empty()) throw std::invalid_argument("empty schedule");
  if (n == 0 || replications < 2) {
    throw std::invalid_argument("A_n check needs n >= 1 and at least two replications");
  }
  AnBoundReport rep;
  rep.n = n;
  rep.replications = replications;
  for (std::size_t s : sequence) {
    if (s >= family.size()) throw std::invalid_argument("schedule index out of range");
    const double b = dobrushin_coefficient(family[s]);
    require(b < 1.0, ErrorCode::DobrushinViolation,
            "member " + std::to_string(s) + " has Dobrushin coefficient 1");
    rep.beta = std::max(rep.beta, b);
  }
  rep.C_prime = 2.0 * phi.osc() / (1.0 - rep.beta);
  rep.bound = rep.C_prime * rep.C_prime * (1.0 + 2.0 * rep.beta / (1.0 - rep.beta));

  const PoissonOracle oracle = PoissonOracle::precomputed(family, phi, sequence);
  SchemeSpec spec;
  spec.kind = SchemeSpec::Kind::Cyclic;
  spec.sequence = sequence;

  std::vector<double> sq(replications, 0.0);
  parallel_for(replications, threads, [&](std::size_t r) {
    ChainDriver driver(family, spec, x0, sequence.front(), n, derive_seed(root_seed, r));
    double A = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t s_prev = driver.s();
      driver.step();
      if (driver.s() != s_prev) {
        A += oracle.solution(driver.s()).g[driver.x()] - oracle.solution(s_prev).g[driver.x()];
      }
    }
    sq[r] = A * A;
  });

  const double R = static_cast<double>(replications);
  const double m = std::accumulate(sq.begin(), sq.end(), 0.0) / R;
  double ss = 0.0;
  for (double v : sq) ss += (v - m) * (v - m);
  const double se = std::sqrt(ss / (R - 1.0) / R);
  rep.raw_second_moment = m;
  rep.estimate = m / static_cast<double>(n);
  rep.std_error = se / static_cast<double>(n);
  rep.pass = rep.estimate <= rep.bound + rep.std_error;
  return rep;
}

}  // namespace amcmc
