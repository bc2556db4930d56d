#include "amcmc/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "amcmc/error.hpp"

namespace amcmc {

GammaSchedule SchemeSpec::gamma_schedule() const {
  const double default_exp = kind == Kind::Ram ? 2.0 / 3.0 : 1.0;
  return GammaSchedule::power(gamma_c.value_or(1.0), gamma_exponent.value_or(default_exp));
}

SchemeSpec::Kind parse_scheme_kind(const std::string& name) {
  if (name == "constant") return SchemeSpec::Kind::Constant;
  if (name == "cyclic") return SchemeSpec::Kind::Cyclic;
  if (name == "am") return SchemeSpec::Kind::Am;
  if (name == "ram") return SchemeSpec::Kind::Ram;
  if (name == "custom") return SchemeSpec::Kind::Custom;
  throw std::invalid_argument("unknown scheme '" + name +
                              "' (expected constant, cyclic, am, ram or custom)");
}

std::string to_string(SchemeSpec::Kind kind) {
  switch (kind) {
    case SchemeSpec::Kind::Constant: return "constant";
    case SchemeSpec::Kind::Cyclic: return "cyclic";
    case SchemeSpec::Kind::Am: return "am";
    case SchemeSpec::Kind::Ram: return "ram";
    case SchemeSpec::Kind::Custom: return "custom";
  }
  return "unknown";
}

namespace {

ParameterSpace scalar_space(double a, double b) {
  return a > 0.0 ? ParameterSpace::eigenbox(a, b, 1) : ParameterSpace::interval(a, b);
}

Eigen::MatrixXd scalar(double v) { return Eigen::MatrixXd::Constant(1, 1, v); }

class ConstantScheme final : public FamilyScheme {
 public:
  ConstantScheme(const KernelFamily& family, std::size_t s0)
      : family_(family), s0_(s0) {}
  std::size_t update(const StepContext& ctx, CounterRng&) override { return ctx.s_prev; }
  double parameter() const override { return family_.parameter(s0_); }

 private:
  const KernelFamily& family_;
  std::size_t s0_;
};

class CyclicScheme final : public FamilyScheme {
 public:
  CyclicScheme(const KernelFamily& family, std::vector<std::size_t> seq, std::size_t s0)
      : family_(family), seq_(std::move(seq)), current_(s0) {
    if (seq_.empty()) throw std::invalid_argument("cyclic scheme needs a non-empty sequence");
    for (std::size_t s : seq_) {
      if (s >= family_.size()) throw std::invalid_argument("cyclic sequence index out of range");
    }
  }
  std::size_t update(const StepContext& ctx, CounterRng&) override {
    current_ = seq_[ctx.k % seq_.size()];
    return current_;
  }
  double parameter() const override { return family_.parameter(current_); }

 private:
  const KernelFamily& family_;
  std::vector<std::size_t> seq_;
  std::size_t current_;
};

class AmScheme final : public FamilyScheme {
 public:
  AmScheme(const KernelFamily& family, const SchemeSpec& spec, ParameterSpace space,
           ConstraintMode mode, std::size_t s0)
      : family_(family),
        gamma_(spec.gamma_schedule()),
        space_(space),
        mode_(mode),
        scale_(spec.am_scale),
        mu_(Eigen::VectorXd::Zero(1)),
        m2_(scalar(family.parameter(s0) / spec.am_scale)),
        variance_(family.parameter(s0)) {}

  std::size_t update(const StepContext& ctx, CounterRng&) override {
    const double g = gamma_(ctx.k);
    Eigen::VectorXd X(1);
    X(0) = family_.coordinate(ctx.x);
    const AmIncrement inc = am_field(X, mu_, m2_);
    mu_ += g * inc.mean;
    m2_ += g * inc.moment;
    const Eigen::MatrixXd candidate = scalar(scale_ * (m2_(0, 0) - mu_(0) * mu_(0)));
    if (space_.contains(candidate)) {
      variance_ = candidate(0, 0);
    } else if (mode_ == ConstraintMode::Project) {
      variance_ = space_.project(candidate)(0, 0);
    }
    return family_.nearest_index(variance_);
  }
  double parameter() const override { return variance_; }

 private:
  const KernelFamily& family_;
  GammaSchedule gamma_;
  ParameterSpace space_;
  ConstraintMode mode_;
  double scale_;
  Eigen::VectorXd mu_;
  Eigen::MatrixXd m2_;
  double variance_;
};

class RamScheme final : public FamilyScheme {
 public:
  RamScheme(const KernelFamily& family, const SchemeSpec& spec, ParameterSpace space,
            ConstraintMode mode, std::size_t s0)
      : family_(family),
        space_(space),
        mode_(mode),
        alpha_star_(spec.alpha_star) {
    state_.S = scalar(family.parameter(s0));
    state_.gamma = spec.gamma_schedule();
  }

  std::size_t update(const StepContext& ctx, CounterRng& rng) override {
    const double alpha =
        family_.acceptance(ctx.s_prev, ctx.x_prev)
            .value_or(1.0 - family_[ctx.s_prev](ctx.x_prev, ctx.x_prev));
    Eigen::VectorXd Z(1);
    do {
      Z(0) = rng.normal();
    } while (Z(0) == 0.0);
    const Eigen::MatrixXd factor = scalar(std::sqrt(state_.S(0, 0)));
    const Eigen::MatrixXd H = ram_field(Z, std::clamp(alpha, 0.0, 1.0), alpha_star_, factor);
    state_ = sa_step_with(state_, H, state_.gamma(ctx.k), space_, mode_);
    return family_.nearest_index(state_.S(0, 0));
  }
  double parameter() const override { return state_.S(0, 0); }

 private:
  const KernelFamily& family_;
  ParameterSpace space_;
  ConstraintMode mode_;
  double alpha_star_;
  SAState state_;
};

class MeanTrackingScheme final : public FamilyScheme {
 public:
  MeanTrackingScheme(const KernelFamily& family, const SchemeSpec& spec,
                     std::optional<ParameterSpace> space, ConstraintMode mode, std::size_t s0)
      : family_(family), space_(space), mode_(mode) {
    state_.S = scalar(family.parameter(s0));
    state_.gamma = spec.gamma_schedule();
  }

  std::size_t update(const StepContext& ctx, CounterRng&) override {
    const Eigen::MatrixXd H = scalar(family_.coordinate(ctx.x) - state_.S(0, 0));
    const double g = state_.gamma(ctx.k);
    if (space_) {
      state_ = sa_step_with(state_, H, g, *space_, mode_);
    } else {
      require(H.allFinite(), ErrorCode::NonFiniteIncrement, "increment has non-finite entries");
      state_.S += g * H;
      state_.k = ctx.k;
      const double t = state_.S(0, 0);
      const double lo = family_.parameter(0);
      const double hi = family_.parameter(family_.size() - 1);
      require(t >= lo && t <= hi, ErrorCode::SchemeEscape,
              "parameter " + std::to_string(t) + " left [" + std::to_string(lo) + ", " +
                  std::to_string(hi) + "] at step " + std::to_string(ctx.k));
    }
    return family_.nearest_index(state_.S(0, 0));
  }
  double parameter() const override { return state_.S(0, 0); }

 private:
  const KernelFamily& family_;
  std::optional<ParameterSpace> space_;
  ConstraintMode mode_;
  SAState state_;
};

/// Publishes the inner scheme's member only at adaptation times.
class RareScheme final : public FamilyScheme {
 public:
  RareScheme(std::unique_ptr<FamilyScheme> inner, RareSchedule schedule, std::size_t s0)
      : inner_(std::move(inner)), schedule_(std::move(schedule)), published_(s0) {}

  std::size_t update(const StepContext& ctx, CounterRng& rng) override {
    if (schedule_.kind() == RareSchedule::Kind::BernoulliActivation) {
      const double u = rng.uniform();
      if (next_adaptation_decision(schedule_, ctx.k, u).adapt) {
        published_ = inner_->update(ctx, rng);
      }
      return published_;
    }
    const std::size_t candidate = inner_->update(ctx, rng);
    if (schedule_.is_adaptation_time(ctx.k)) published_ = candidate;
    return published_;
  }
  double parameter() const override { return inner_->parameter(); }

 private:
  std::unique_ptr<FamilyScheme> inner_;
  RareSchedule schedule_;
  std::size_t published_;
};

}  // namespace

std::unique_ptr<FamilyScheme> make_scheme(const SchemeSpec& spec, const KernelFamily& family,
                                          std::size_t s0, std::uint64_t horizon) {
  if (s0 >= family.size()) throw std::invalid_argument("s0 out of range for the family");
  const double lo = family.parameter(0);
  const double hi = family.parameter(family.size() - 1);
  const ConstraintSpec cons =
      spec.constraint.value_or(ConstraintSpec{lo, hi, ConstraintMode::Project});

  std::unique_ptr<FamilyScheme> scheme;
  switch (spec.kind) {
    case SchemeSpec::Kind::Constant:
      scheme = std::make_unique<ConstantScheme>(family, s0);
      break;
    case SchemeSpec::Kind::Cyclic:
      scheme = std::make_unique<CyclicScheme>(family, spec.sequence, s0);
      break;
    case SchemeSpec::Kind::Am:
      scheme = std::make_unique<AmScheme>(family, spec, scalar_space(cons.a, cons.b), cons.mode,
                                          s0);
      break;
    case SchemeSpec::Kind::Ram:
      scheme = std::make_unique<RamScheme>(family, spec, scalar_space(cons.a, cons.b),
                                           cons.mode, s0);
      break;
    case SchemeSpec::Kind::Custom: {
      std::optional<ParameterSpace> space;
      if (spec.constraint) space = scalar_space(spec.constraint->a, spec.constraint->b);
      scheme = std::make_unique<MeanTrackingScheme>(family, spec, space, cons.mode, s0);
      break;
    }
  }
  if (spec.rare) {
    const GammaSchedule g = spec.gamma_schedule();
    RareSchedule sched =
        spec.rare->kind == RareSchedule::Kind::DeterministicTimes
            ? RareSchedule::deterministic(spec.rare->c, spec.rare->epsilon, horizon, g)
            : RareSchedule::bernoulli(spec.rare->c, spec.rare->epsilon, g);
    scheme = std::make_unique<RareScheme>(std::move(scheme), std::move(sched), s0);
  }
  return scheme;
}

}  // namespace amcmc
