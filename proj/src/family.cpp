#include "amcmc/family.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "amcmc/error.hpp"
#include "amcmc/rwm.hpp"

namespace amcmc {

KernelFamily::KernelFamily(std::vector<StochasticMatrix> kernels, Distribution pi,
                           std::vector<double> parameters, std::vector<double> coordinates,
                           double stationarity_tol)
    : kernels_(std::move(kernels)),
      pi_(std::move(pi)),
      parameters_(std::move(parameters)),
      coordinates_(std::move(coordinates)) {
  require(!kernels_.empty(), ErrorCode::InvalidKernel, "empty kernel family");
  for (const auto& P : kernels_) require_stationary(P, pi_, stationarity_tol);
  if (!parameters_.empty()) {
    require(parameters_.size() == kernels_.size(), ErrorCode::DimensionMismatch,
            "one parameter value per member expected");
    if (!std::is_sorted(parameters_.begin(), parameters_.end())) {
      throw std::invalid_argument("member parameters must be sorted ascending");
    }
  }
  if (!coordinates_.empty()) {
    require(coordinates_.size() == pi_.size(), ErrorCode::DimensionMismatch,
            "one coordinate per state expected");
  }
}

double KernelFamily::parameter(std::size_t s) const {
  if (s >= size()) throw std::out_of_range("family member out of range");
  return parameters_.empty() ? static_cast<double>(s) : parameters_[s];
}

double KernelFamily::coordinate(std::size_t x) const {
  if (x >= num_states()) throw std::out_of_range("state out of range");
  return coordinates_.empty() ? static_cast<double>(x) : coordinates_[x];
}

std::size_t KernelFamily::nearest_index(double value) const {
  std::size_t best = 0;
  double best_dist = std::fabs(parameter(0) - value);
  for (std::size_t s = 1; s < size(); ++s) {
    const double dist = std::fabs(parameter(s) - value);
    if (dist < best_dist) {
      best = s;
      best_dist = dist;
    }
  }
  return best;
}

void KernelFamily::set_acceptance(std::vector<std::vector<double>> acceptance) {
  require(acceptance.size() == size(), ErrorCode::DimensionMismatch,
          "one acceptance profile per member expected");
  for (const auto& a : acceptance) {
    require(a.size() == num_states(), ErrorCode::DimensionMismatch,
            "acceptance profile length differs from state count");
  }
  acceptance_ = std::move(acceptance);
}

std::optional<double> KernelFamily::acceptance(std::size_t s, std::size_t x) const {
  if (acceptance_.empty()) return std::nullopt;
  return acceptance_.at(s).at(x);
}

namespace families {

KernelFamily cyclic_counterexample() {
  // P_a: 1 -> 1 (0.5), 1 -> 2 (0.5), 2 -> 3, 3 -> 1.
  // P_b: 1 -> 1 (0.5), 1 -> 3 (0.5), 2 -> 1, 3 -> 2.
  StochasticMatrix Pa({{0.5, 0.5, 0.0}, {0.0, 0.0, 1.0}, {1.0, 0.0, 0.0}});
  StochasticMatrix Pb({{0.5, 0.0, 0.5}, {1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}});
  Distribution pi({0.5, 0.25, 0.25});
  return KernelFamily({std::move(Pa), std::move(Pb)}, std::move(pi), {}, {}, kExactTol);
}

KernelFamily independent(const Distribution& pi) {
  return KernelFamily({StochasticMatrix::independent(pi)}, pi);
}

KernelFamily smoothed(const KernelFamily& base, double eps) {
  if (!(eps >= 0.0 && eps <= 1.0)) throw std::invalid_argument("eps must lie in [0, 1]");
  const StochasticMatrix iid = StochasticMatrix::independent(base.pi());
  std::vector<StochasticMatrix> out;
  out.reserve(base.size());
  for (const auto& P : base.kernels()) out.push_back(P.mix(iid, eps));
  std::vector<double> params(base.parameters().begin(), base.parameters().end());
  std::vector<double> coords;
  if (base.num_states() > 0) {
    coords.reserve(base.num_states());
    for (std::size_t x = 0; x < base.num_states(); ++x) coords.push_back(base.coordinate(x));
  }
  return KernelFamily(std::move(out), base.pi(), std::move(params), std::move(coords));
}

KernelFamily convex_mixture(const StochasticMatrix& P, const StochasticMatrix& Q,
                            const Distribution& pi, std::size_t count) {
  if (count < 2) throw std::invalid_argument("convex mixture needs at least two members");
  std::vector<StochasticMatrix> out;
  std::vector<double> params;
  for (std::size_t i = 0; i < count; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(count - 1);
    out.push_back(P.mix(Q, t));
    params.push_back(t);
  }
  return KernelFamily(std::move(out), pi, std::move(params));
}

KernelFamily rwm_variances(const CompactTarget& target, std::vector<double> variances) {
  if (target.dim() != 1) throw std::invalid_argument("variance families need a 1-d target");
  std::sort(variances.begin(), variances.end());
  std::vector<StochasticMatrix> kernels;
  std::vector<std::vector<double>> acceptance;
  std::optional<Distribution> pi;
  for (double v : variances) {
    auto built = build_discrete_rwm_detailed(target, RwmParameter::scalar(v));
    kernels.push_back(std::move(built.kernel));
    acceptance.push_back(std::move(built.acceptance));
    if (!pi) pi = std::move(built.pi);
  }
  std::vector<double> coords;
  for (std::size_t x = 0; x < target.num_states(); ++x) coords.push_back(target.grid_point(x)[0]);
  KernelFamily fam(std::move(kernels), *pi, std::move(variances), std::move(coords));
  fam.set_acceptance(std::move(acceptance));
  return fam;
}

}  // namespace families

namespace random_kernels {

StochasticMatrix positive(std::size_t n, CounterRng& rng) {
  std::vector<double> p(n * n);
  for (std::size_t x = 0; x < n; ++x) {
    double total = 0.0;
    for (std::size_t y = 0; y < n; ++y) {
      p[x * n + y] = 1.0 - rng.uniform();  // (0, 1]
      total += p[x * n + y];
    }
    for (std::size_t y = 0; y < n; ++y) p[x * n + y] /= total;
  }
  return StochasticMatrix(n, std::move(p), kBoundTol);
}

Distribution distribution(std::size_t n, CounterRng& rng) {
  std::vector<double> w(n);
  double total = 0.0;
  for (double& v : w) {
    v = 0.05 + rng.uniform();
    total += v;
  }
  for (double& v : w) v /= total;
  return Distribution(std::move(w), kBoundTol);
}

StochasticMatrix reversible(const Distribution& pi, CounterRng& rng, double laziness) {
  if (!(laziness >= 0.0 && laziness < 1.0)) {
    throw std::invalid_argument("laziness must lie in [0, 1)");
  }
  const std::size_t n = pi.size();
  if (n == 1) return StochasticMatrix::identity(1);
  // Symmetric proposal with zero diagonal, then Metropolis acceptance.
  std::vector<double> q(n * n, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = x + 1; y < n; ++y) q[x * n + y] = q[y * n + x] = 1.0 - rng.uniform();
  }
  double row_max = 0.0;
  for (std::size_t x = 0; x < n; ++x) {
    double s = 0.0;
    for (std::size_t y = 0; y < n; ++y) s += q[x * n + y];
    row_max = std::max(row_max, s);
  }
  std::vector<double> p(n * n, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    double moved = 0.0;
    for (std::size_t y = 0; y < n; ++y) {
      if (y == x) continue;
      const double v = (1.0 - laziness) * q[x * n + y] / row_max * std::min(1.0, pi[y] / pi[x]);
      p[x * n + y] = v;
      moved += v;
    }
    p[x * n + x] = 1.0 - moved;
  }
  return StochasticMatrix(n, std::move(p), kBoundTol);
}

}  // namespace random_kernels

}  // namespace amcmc
