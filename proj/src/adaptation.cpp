#include "amcmc/adaptation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "amcmc/error.hpp"

namespace amcmc {

GammaSchedule GammaSchedule::power(double c, double exponent) {
  if (!(c > 0.0) || !std::isfinite(c) || !std::isfinite(exponent) || exponent < 0.0) {
    throw std::invalid_argument("gamma schedule needs c > 0 and exponent >= 0");
  }
  GammaSchedule g;
  g.c_ = c;
  g.exponent_ = exponent;
  return g;
}

GammaSchedule GammaSchedule::custom(std::function<double(std::uint64_t)> fn) {
  GammaSchedule g;
  g.fn_ = std::move(fn);
  return g;
}

double GammaSchedule::operator()(std::uint64_t k) const {
  if (k == 0) throw std::invalid_argument("step sizes are indexed from k = 1");
  const double v = fn_ ? fn_(k) : c_ * std::pow(static_cast<double>(k), -exponent_);
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::domain_error("step size must be positive, got " + std::to_string(v) +
                            " at k = " + std::to_string(k));
  }
  return v;
}

ParameterSpace ParameterSpace::finite_index(std::size_t count) {
  if (count == 0) throw std::invalid_argument("finite index space needs count >= 1");
  ParameterSpace s;
  s.kind_ = Kind::FiniteIndex;
  s.count_ = count;
  s.dim_ = 1;
  return s;
}

ParameterSpace ParameterSpace::eigenbox(double a, double b, std::size_t dim) {
  if (!(a > 0.0 && a < b && std::isfinite(b)) || dim == 0) {
    throw std::invalid_argument("eigenbox needs 0 < a < b < inf and dim >= 1");
  }
  ParameterSpace s;
  s.kind_ = Kind::EigenBox;
  s.a_ = a;
  s.b_ = b;
  s.dim_ = dim;
  return s;
}

ParameterSpace ParameterSpace::interval(double a, double b) {
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) {
    throw std::invalid_argument("interval needs finite a < b");
  }
  ParameterSpace s;
  s.kind_ = Kind::Interval;
  s.a_ = a;
  s.b_ = b;
  s.dim_ = 1;
  return s;
}

bool ParameterSpace::contains(const Eigen::MatrixXd& S) const {
  if (!S.allFinite()) return false;
  if (kind_ == Kind::FiniteIndex) {
    if (S.rows() != 1 || S.cols() != 1) return false;
    const double v = S(0, 0);
    return v >= 0.0 && v <= static_cast<double>(count_ - 1) && v == std::floor(v);
  }
  if (kind_ == Kind::Interval) {
    return S.rows() == 1 && S.cols() == 1 && S(0, 0) >= a_ && S(0, 0) <= b_;
  }
  const auto d = static_cast<Eigen::Index>(dim_);
  if (S.rows() != d || S.cols() != d) return false;
  if (d == 1) return S(0, 0) >= a_ && S(0, 0) <= b_;
  if ((S - S.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol) return false;
  const Eigen::MatrixXd sym = 0.5 * (S + S.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym, Eigen::EigenvaluesOnly);
  const double slack = kEigenTol * std::max(1.0, b_);
  return eig.eigenvalues().minCoeff() >= a_ - slack && eig.eigenvalues().maxCoeff() <= b_ + slack;
}

Eigen::MatrixXd ParameterSpace::project(const Eigen::MatrixXd& S) const {
  if (kind_ == Kind::FiniteIndex) {
    Eigen::MatrixXd out(1, 1);
    out(0, 0) = std::clamp(std::round(S(0, 0)), 0.0, static_cast<double>(count_ - 1));
    return out;
  }
  if (S.rows() == 1 && S.cols() == 1) {
    Eigen::MatrixXd out(1, 1);
    out(0, 0) = std::clamp(S(0, 0), a_, b_);
    return out;
  }
  const Eigen::MatrixXd sym = 0.5 * (S + S.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  const Eigen::VectorXd clamped = eig.eigenvalues().cwiseMax(a_).cwiseMin(b_);
  const Eigen::MatrixXd& V = eig.eigenvectors();
  Eigen::MatrixXd out = V * clamped.asDiagonal() * V.transpose();
  return 0.5 * (out + out.transpose());
}

SAState sa_step_with(const SAState& state, const Eigen::MatrixXd& H, double gamma,
                     const ParameterSpace& space, ConstraintMode mode) {
  require(H.rows() == state.S.rows() && H.cols() == state.S.cols(), ErrorCode::ShapeMismatch,
          "increment shape differs from parameter shape");
  require(H.allFinite(), ErrorCode::NonFiniteIncrement, "increment has non-finite entries");
  SAState next = state;
  next.k = state.k + 1;
  next.last_infeasible = false;
  if (gamma == 0.0) return next;
  Eigen::MatrixXd candidate = state.S + gamma * H;
  if (space.contains(candidate)) {
    next.S = std::move(candidate);
    return next;
  }
  next.last_infeasible = true;
  if (mode == ConstraintMode::Project) next.S = space.project(candidate);
  return next;
}

SAState sa_step(const SAState& state, const Eigen::MatrixXd& H, const ParameterSpace& space,
                ConstraintMode mode) {
  return sa_step_with(state, H, state.gamma(state.k + 1), space, mode);
}

AmIncrement am_field(const Eigen::VectorXd& X, const Eigen::VectorXd& mu,
                     const Eigen::MatrixXd& Sigma) {
  const auto d = X.size();
  require(mu.size() == d && Sigma.rows() == d && Sigma.cols() == d, ErrorCode::ShapeMismatch,
          "adaptive Metropolis field: inconsistent shapes");
  return AmIncrement{X - mu, X * X.transpose() - Sigma};
}

Eigen::MatrixXd ram_field(const Eigen::VectorXd& Z, double alpha, double alpha_star,
                          const Eigen::MatrixXd& S) {
  const auto d = Z.size();
  require(S.rows() == d && S.cols() == d, ErrorCode::ShapeMismatch,
          "robust adaptive Metropolis field: factor shape differs from noise length");
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("acceptance probability outside [0, 1]");
  }
  const double nz2 = Z.squaredNorm();
  require(nz2 > 0.0, ErrorCode::ZeroNoiseVector, "proposal noise vector is zero");
  const Eigen::VectorXd u = S * Z;
  Eigen::MatrixXd H = ((alpha - alpha_star) / nz2) * (u * u.transpose());
  return 0.5 * (H + H.transpose());
}

RareSchedule RareSchedule::deterministic(double c, double epsilon, std::uint64_t horizon,
                                         GammaSchedule gamma) {
  if (!(c > 0.0) || !(epsilon > 0.0)) {
    throw std::invalid_argument("rare schedule needs c > 0 and epsilon > 0");
  }
  RareSchedule s;
  s.kind_ = Kind::DeterministicTimes;
  s.c_ = c;
  s.epsilon_ = epsilon;
  s.gamma_ = std::move(gamma);
  s.horizon_ = horizon;
  std::uint64_t tau = 0;
  for (std::uint64_t j = 1;; ++j) {
    tau += s.increment(j);
    if (tau > horizon) break;
    s.times_.push_back(tau);
  }
  return s;
}

RareSchedule RareSchedule::bernoulli(double c, double epsilon, GammaSchedule gamma) {
  if (!(c > 0.0) || !(epsilon > 0.0)) {
    throw std::invalid_argument("rare schedule needs c > 0 and epsilon > 0");
  }
  RareSchedule s;
  s.kind_ = Kind::BernoulliActivation;
  s.c_ = c;
  s.epsilon_ = epsilon;
  s.gamma_ = std::move(gamma);
  return s;
}

RareSchedule RareSchedule::continuous(GammaSchedule gamma) {
  RareSchedule s;
  s.kind_ = Kind::BernoulliActivation;
  s.always_ = true;
  s.gamma_ = std::move(gamma);
  return s;
}

std::uint64_t RareSchedule::increment(std::uint64_t j) const {
  if (j == 0) throw std::invalid_argument("increments are indexed from j = 1");
  const double lj = std::log(static_cast<double>(j));
  const double v = std::ceil(c_ * std::pow(lj, 1.0 + epsilon_));
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(v));
}

double RareSchedule::activation_probability(std::uint64_t k) const {
  if (always_) return 1.0;
  if (k == 0) throw std::invalid_argument("steps are indexed from k = 1");
  const double lk = std::log(static_cast<double>(k));
  if (lk <= 0.0) return 1.0;
  return std::min(1.0, c_ * std::pow(lk, -(1.0 + epsilon_)));
}

bool RareSchedule::is_adaptation_time(std::uint64_t k) const {
  if (kind_ != Kind::DeterministicTimes) {
    throw std::logic_error("adaptation times are random for the Bernoulli schedule");
  }
  if (k > horizon_) {
    throw std::out_of_range("step " + std::to_string(k) + " beyond schedule horizon " +
                            std::to_string(horizon_));
  }
  return std::binary_search(times_.begin(), times_.end(), k);
}

AdaptationDecision next_adaptation_decision(const RareSchedule& sched, std::uint64_t k,
                                            double u) {
  if (k == 0) throw std::invalid_argument("steps are indexed from k = 1");
  AdaptationDecision d;
  if (sched.kind() == RareSchedule::Kind::DeterministicTimes) {
    d.adapt = sched.is_adaptation_time(k);
  } else {
    d.adapt = u <= sched.activation_probability(k);
  }
  d.gamma_eff = d.adapt ? sched.gamma()(k) : 0.0;
  return d;
}

std::vector<double> indicator_series(const RareSchedule& sched, std::uint64_t n) {
  if (sched.always()) {
    return std::vector<double>(n, 1.0);
  }
  if (sched.kind() != RareSchedule::Kind::DeterministicTimes) {
    throw std::logic_error("indicator series needs deterministic adaptation times");
  }
  std::vector<double> D(n, 0.0);
  for (std::uint64_t t : sched.times()) {
    if (t > n) break;
    D[t - 1] = 1.0;
  }
  return D;
}

WaningReport waning_diagnostic(std::vector<double> D_series, double p, unsigned first_exponent) {
  if (!(p > 0.0)) throw std::invalid_argument("waning exponent must be positive");
  WaningReport r;
  r.p = p;
  const std::size_t n = D_series.size();
  r.partial_sums.resize(n);
  std::vector<double> weighted(n);
  double acc = 0.0;
  double wacc = 0.0;
  bool all_zero = true;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = D_series[i];
    require(d >= 0.0 && d <= 1.0, ErrorCode::OutOfRangeD,
            "D_" + std::to_string(i + 1) + " = " + std::to_string(d) + " outside [0, 1]");
    if (d != 0.0) all_zero = false;
    acc += d;
    wacc += d / std::pow(static_cast<double>(i + 1), p);
    r.partial_sums[i] = acc;
    weighted[i] = wacc;
  }

  std::uint64_t cp = 1;
  for (unsigned j = 0; j < first_exponent; ++j) cp *= 10;
  for (; cp < n; cp *= 10) r.checkpoints.push_back(cp);
  if (n > 0) r.checkpoints.push_back(n);

  for (std::uint64_t c : r.checkpoints) {
    r.statistic.push_back(r.partial_sums[c - 1] / std::pow(static_cast<double>(c), p));
    r.weighted_sums.push_back(weighted[c - 1]);
  }
  if (r.checkpoints.size() >= 2) {
    const std::size_t last = r.checkpoints.size() - 1;
    const auto span = static_cast<double>(r.checkpoints[last] - r.checkpoints[last - 1]);
    r.tail_increment = (r.weighted_sums[last] - r.weighted_sums[last - 1]) / span;
  }
  r.decreasing = r.statistic.size() >= 2;
  for (std::size_t i = 1; i < r.statistic.size(); ++i) {
    if (!(r.statistic[i] < r.statistic[i - 1])) r.decreasing = false;
  }
  r.waning = all_zero || r.decreasing;
  r.D_series = std::move(D_series);
  return r;
}

}  // namespace amcmc
