#include "amcmc/rwm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <stdexcept>

#include "amcmc/error.hpp"

namespace amcmc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_box(const std::vector<double>& lower, const std::vector<double>& upper,
               std::size_t m) {
  if (lower.empty() || lower.size() != upper.size()) {
    throw std::invalid_argument("box bounds must be non-empty and of equal length");
  }
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (!(lower[i] < upper[i])) throw std::invalid_argument("box has empty extent");
  }
  if (m == 0) throw std::invalid_argument("grid resolution must be >= 1");
}

// Multi-index of `state` in an m^d grid, axis 0 slowest.
std::vector<std::size_t> unflatten(std::size_t state, std::size_t m, std::size_t d) {
  std::vector<std::size_t> idx(d);
  for (std::size_t a = d; a-- > 0;) {
    idx[a] = state % m;
    state /= m;
  }
  return idx;
}

}  // namespace

CompactTarget::CompactTarget(std::string name, std::vector<double> lower,
                             std::vector<double> upper, std::size_t m, LogDensity log_density)
    : name_(std::move(name)),
      lower_(std::move(lower)),
      upper_(std::move(upper)),
      m_(m),
      log_density_(std::move(log_density)) {
  check_box(lower_, upper_, m_);
  if (!log_density_) throw std::invalid_argument("missing log density");
}

CompactTarget CompactTarget::uniform(std::vector<double> lower, std::vector<double> upper,
                                     std::size_t m) {
  return CompactTarget("uniform", std::move(lower), std::move(upper), m,
                       [](std::span<const double>) { return 0.0; });
}

CompactTarget CompactTarget::truncated_gaussian(std::vector<double> lower,
                                                std::vector<double> upper, std::size_t m,
                                                double mean, double sd) {
  if (!(sd > 0.0)) throw std::invalid_argument("sd must be positive");
  return CompactTarget("truncated-gaussian", std::move(lower), std::move(upper), m,
                       [mean, sd](std::span<const double> x) {
                         double s = 0.0;
                         for (double v : x) {
                           const double z = (v - mean) / sd;
                           s += z * z;
                         }
                         return -0.5 * s;
                       });
}

CompactTarget CompactTarget::bimodal_mixture(std::vector<double> lower,
                                             std::vector<double> upper, std::size_t m,
                                             double offset, double sd) {
  if (!(sd > 0.0)) throw std::invalid_argument("sd must be positive");
  return CompactTarget("bimodal-mixture", std::move(lower), std::move(upper), m,
                       [offset, sd](std::span<const double> x) {
                         double a = 0.0;
                         double b = 0.0;
                         for (double v : x) {
                           a += (v + offset) * (v + offset);
                           b += (v - offset) * (v - offset);
                         }
                         a *= -0.5 / (sd * sd);
                         b *= -0.5 / (sd * sd);
                         const double hi = std::max(a, b);
                         return hi + std::log(0.5 * std::exp(a - hi) + 0.5 * std::exp(b - hi));
                       });
}

CompactTarget CompactTarget::table(std::vector<double> lower, std::vector<double> upper,
                                   std::size_t m, std::vector<double> density) {
  check_box(lower, upper, m);
  std::size_t n = 1;
  for (std::size_t i = 0; i < lower.size(); ++i) n *= m;
  if (density.size() != n) {
    throw std::invalid_argument("density table needs m^d = " + std::to_string(n) + " entries");
  }
  for (double v : density) {
    require(std::isfinite(v) && v > 0.0, ErrorCode::NonPositiveDensity,
            "density table has a non-positive entry");
  }
  std::vector<double> lo = lower;
  std::vector<double> hi = upper;
  auto log_table = std::make_shared<std::vector<double>>(density.size());
  std::transform(density.begin(), density.end(), log_table->begin(),
                 [](double v) { return std::log(v); });
  return CompactTarget("table", std::move(lower), std::move(upper), m,
                       [lo, hi, m, log_table](std::span<const double> x) {
                         std::size_t state = 0;
                         for (std::size_t a = 0; a < x.size(); ++a) {
                           const double h = (hi[a] - lo[a]) / static_cast<double>(m);
                           auto cell = static_cast<std::size_t>(
                               std::clamp(std::floor((x[a] - lo[a]) / h), 0.0,
                                          static_cast<double>(m - 1)));
                           state = state * m + cell;
                         }
                         return (*log_table)[state];
                       });
}

std::size_t CompactTarget::num_states() const noexcept {
  std::size_t n = 1;
  for (std::size_t i = 0; i < dim(); ++i) n *= m_;
  return n;
}

double CompactTarget::spacing(std::size_t axis) const noexcept {
  return (upper_[axis] - lower_[axis]) / static_cast<double>(m_);
}

bool CompactTarget::in_box(std::span<const double> x) const noexcept {
  for (std::size_t i = 0; i < dim(); ++i) {
    if (x[i] < lower_[i] || x[i] > upper_[i]) return false;
  }
  return true;
}

double CompactTarget::log_density(std::span<const double> x) const {
  if (x.size() != dim()) throw std::invalid_argument("point dimension differs from target");
  if (!in_box(x)) return kNegInf;
  return log_density_(x);
}

std::vector<double> CompactTarget::grid_point(std::size_t state) const {
  const auto idx = unflatten(state, m_, dim());
  std::vector<double> x(dim());
  for (std::size_t a = 0; a < dim(); ++a) {
    x[a] = lower_[a] + (static_cast<double>(idx[a]) + 0.5) * spacing(a);
  }
  return x;
}

Distribution CompactTarget::grid_distribution() const {
  const std::size_t n = num_states();
  std::vector<double> logw(n);
  for (std::size_t s = 0; s < n; ++s) {
    logw[s] = log_density(grid_point(s));
    require(std::isfinite(logw[s]), ErrorCode::NonPositiveDensity,
            "density vanishes at grid state " + std::to_string(s));
  }
  const double hi = *std::max_element(logw.begin(), logw.end());
  double total = 0.0;
  for (double& v : logw) {
    v = std::exp(v - hi);
    total += v;
  }
  for (double& v : logw) v /= total;
  return Distribution(std::move(logw));
}

RwmParameter::RwmParameter(Eigen::MatrixXd sigma, double a, double b) : sigma_(std::move(sigma)) {
  if (sigma_.rows() == 0 || sigma_.rows() != sigma_.cols()) {
    throw std::invalid_argument("proposal covariance must be square and non-empty");
  }
  if ((sigma_ - sigma_.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
    throw std::invalid_argument("proposal covariance is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma_, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || lo < a || hi > b) {
    throw std::invalid_argument("proposal covariance eigenvalues outside [" + std::to_string(a) +
                                ", " + std::to_string(b) + "]");
  }
  a_ = a;
  b_ = b;
  chol_ = Eigen::LLT<Eigen::MatrixXd>(sigma_).matrixL();
}

RwmParameter::RwmParameter(Eigen::MatrixXd sigma)
    : RwmParameter(sigma, 0.0, std::numeric_limits<double>::infinity()) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma_, Eigen::EigenvaluesOnly);
  a_ = eig.eigenvalues().minCoeff();
  b_ = eig.eigenvalues().maxCoeff();
}

double DiscreteRwm::mean_acceptance() const {
  double s = 0.0;
  for (std::size_t x = 0; x < acceptance.size(); ++x) s += pi[x] * acceptance[x];
  return s;
}

DiscreteRwm build_discrete_rwm_detailed(const CompactTarget& target, const RwmParameter& sigma,
                                        std::size_t max_states) {
  const std::size_t d = target.dim();
  const std::size_t m = target.resolution();
  const std::size_t n = target.num_states();
  require(n <= max_states, ErrorCode::GridTooLarge,
          std::to_string(n) + " states exceed the cap of " + std::to_string(max_states));
  if (sigma.dim() != d) throw std::invalid_argument("proposal dimension differs from target");

  Distribution pi = target.grid_distribution();
  const Eigen::MatrixXd prec = sigma.sigma().inverse();
  std::vector<double> h(d);
  for (std::size_t a = 0; a < d; ++a) h[a] = target.spacing(a);

  auto weight = [&](const std::vector<long>& off) {
    Eigen::VectorXd delta(static_cast<Eigen::Index>(d));
    for (std::size_t a = 0; a < d; ++a) {
      delta(static_cast<Eigen::Index>(a)) = static_cast<double>(off[a]) * h[a];
    }
    return std::exp(-0.5 * delta.dot(prec * delta));
  };

  // Lattice normalizer over offsets covering 12 standard deviations per axis.
  std::vector<long> reach(d);
  std::size_t lattice = 1;
  for (std::size_t a = 0; a < d; ++a) {
    const double sd = std::sqrt(sigma.sigma()(static_cast<Eigen::Index>(a),
                                              static_cast<Eigen::Index>(a)));
    reach[a] = static_cast<long>(std::ceil(12.0 * sd / h[a])) + 1;
    lattice *= static_cast<std::size_t>(2 * reach[a] + 1);
  }
  require(lattice <= 50'000'000, ErrorCode::GridTooLarge,
          "proposal lattice too fine relative to the covariance");
  double Z = 0.0;
  {
    std::vector<long> off(d);
    for (std::size_t a = 0; a < d; ++a) off[a] = -reach[a];
    for (std::size_t i = 0; i < lattice; ++i) {
      Z += weight(off);
      for (std::size_t a = d; a-- > 0;) {
        if (++off[a] <= reach[a]) break;
        off[a] = -reach[a];
      }
    }
  }

  // Proposal weight for every in-grid offset, indexed by offset + (m - 1) per axis.
  const std::size_t span = 2 * m - 1;
  std::size_t table_size = 1;
  for (std::size_t a = 0; a < d; ++a) table_size *= span;
  std::vector<double> qtab(table_size);
  {
    std::vector<long> o(d);
    for (std::size_t t = 0; t < table_size; ++t) {
      std::size_t rem = t;
      for (std::size_t a = d; a-- > 0;) {
        o[a] = static_cast<long>(rem % span) - static_cast<long>(m - 1);
        rem /= span;
      }
      qtab[t] = weight(o) / Z;
    }
  }

  std::vector<std::vector<std::size_t>> idx(n);
  for (std::size_t s = 0; s < n; ++s) idx[s] = unflatten(s, m, d);

  std::vector<double> rows(n * n, 0.0);
  std::vector<double> acceptance(n, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    double moved = 0.0;
    double accepted = 0.0;
    for (std::size_t y = 0; y < n; ++y) {
      std::size_t t = 0;
      for (std::size_t a = 0; a < d; ++a) t = t * span + (idx[y][a] + m - 1 - idx[x][a]);
      const double q = qtab[t];
      const double acc = std::min(1.0, pi[y] / pi[x]);
      accepted += q * acc;
      if (y != x) {
        rows[x * n + y] = q * acc;
        moved += q * acc;
      }
    }
    rows[x * n + x] = std::max(0.0, 1.0 - moved);
    acceptance[x] = accepted;
  }
  return DiscreteRwm{StochasticMatrix(n, std::move(rows), kBoundTol), std::move(pi),
                     std::move(acceptance)};
}

StochasticMatrix build_discrete_rwm(const CompactTarget& target, const RwmParameter& sigma,
                                    std::size_t max_states) {
  return build_discrete_rwm_detailed(target, sigma, max_states).kernel;
}

double detailed_balance_residual(const StochasticMatrix& P, const Distribution& pi) {
  require(P.size() == pi.size(), ErrorCode::DimensionMismatch, "detailed balance sizes differ");
  double worst = 0.0;
  for (std::size_t i = 0; i < P.size(); ++i) {
    for (std::size_t j = i + 1; j < P.size(); ++j) {
      worst = std::max(worst, std::fabs(pi[i] * P(i, j) - pi[j] * P(j, i)));
    }
  }
  return worst;
}

RwmMove rwm_propose_accept(std::span<const double> x, const RwmParameter& sigma,
                           const CompactTarget& target, CounterRng& rng) {
  const std::size_t d = target.dim();
  if (x.size() != d || sigma.dim() != d) {
    throw std::invalid_argument("point or covariance dimension differs from target");
  }
  RwmMove mv;
  mv.Z.resize(static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < d; ++i) mv.Z(static_cast<Eigen::Index>(i)) = rng.normal();
  const Eigen::VectorXd step = sigma.cholesky() * mv.Z;
  mv.proposal.resize(d);
  for (std::size_t i = 0; i < d; ++i) mv.proposal[i] = x[i] + step(static_cast<Eigen::Index>(i));

  const double lx = target.log_density(x);
  const double ly = target.log_density(mv.proposal);
  mv.alpha = std::isfinite(ly) ? std::min(1.0, std::exp(ly - lx)) : 0.0;
  const double u = rng.uniform();
  mv.accepted = u < mv.alpha;
  mv.next = mv.accepted ? mv.proposal : std::vector<double>(x.begin(), x.end());
  return mv;
}

double continuous_acceptance_rate(const CompactTarget& target, const RwmParameter& sigma,
                                  std::vector<double> x0, std::size_t n, std::uint64_t seed) {
  CounterRng rng(seed);
  std::vector<double> x = std::move(x0);
  if (!target.in_box(x)) throw std::invalid_argument("starting point outside the box");
  std::size_t accepted = 0;
  for (std::size_t k = 0; k < n; ++k) {
    auto mv = rwm_propose_accept(x, sigma, target, rng);
    if (mv.accepted) ++accepted;
    x = std::move(mv.next);
  }
  return n == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(n);
}

double lipschitz_surrogate(const RwmParameter& s, const RwmParameter& s_prev, double L) {
  if (!(L >= 0.0)) throw std::invalid_argument("Lipschitz constant must be non-negative");
  if (s.dim() != s_prev.dim()) throw std::invalid_argument("parameter dimensions differ");
  return std::min(1.0, L * (s.sigma() - s_prev.sigma()).norm());
}

double fit_lipschitz_constant(const CompactTarget& target, std::span<const RwmParameter> grid,
                              std::size_t max_states) {
  std::vector<StochasticMatrix> kernels;
  kernels.reserve(grid.size());
  for (const auto& s : grid) kernels.push_back(build_discrete_rwm(target, s, max_states));
  double L = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = i + 1; j < grid.size(); ++j) {
      const double dist = (grid[i].sigma() - grid[j].sigma()).norm();
      if (dist == 0.0) continue;
      L = std::max(L, max_tv_between_kernels(kernels[i], kernels[j]) / dist);
    }
  }
  return L;
}

}  // namespace amcmc
