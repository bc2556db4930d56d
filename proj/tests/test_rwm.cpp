#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "amcmc/adaptation.hpp"
#include "amcmc/error.hpp"
#include "amcmc/rwm.hpp"
#include "oracles.hpp"

using namespace amcmc;

TEST_CASE("target discretization") {
  const auto t = CompactTarget::truncated_gaussian({-3.0}, {3.0}, 50);
  CHECK(t.num_states() == 50);
  CHECK(t.spacing(0) == doctest::Approx(6.0 / 50));
  CHECK(t.grid_point(0)[0] == doctest::Approx(-3.0 + 0.06));
  const Distribution pi = t.grid_distribution();
  double s = 0.0;
  for (double w : pi.weights()) s += w;
  CHECK(std::fabs(s - 1.0) <= 1e-12);
  // Oracle: normalized exp(-x^2 / 2) at cell centres.
  std::vector<double> ref(50);
  double z = 0.0;
  for (std::size_t i = 0; i < 50; ++i) {
    const double x = -3.0 + (double(i) + 0.5) * 0.12;
    ref[i] = std::exp(-0.5 * x * x);
    z += ref[i];
  }
  for (std::size_t i = 0; i < 50; ++i) CHECK(pi[i] == doctest::Approx(ref[i] / z).epsilon(1e-12));
  CHECK(std::isinf(t.log_density(std::vector<double>{3.5})));

  const auto t2 = CompactTarget::uniform({0.0, 0.0}, {1.0, 2.0}, 4);
  CHECK(t2.num_states() == 16);
  // Axis 0 varies slowest.
  CHECK(t2.grid_point(1)[0] == t2.grid_point(0)[0]);
  CHECK(t2.grid_point(1)[1] > t2.grid_point(0)[1]);
}

TEST_CASE("discrete RWM kernels") {
  SUBCASE("two-state uniform chain is symmetric") {
    const auto t = CompactTarget::uniform({0.0}, {1.0}, 2);
    const StochasticMatrix P = build_discrete_rwm(t, RwmParameter::scalar(0.25));
    CHECK(P(0, 1) == doctest::Approx(P(1, 0)).epsilon(1e-15));
    const Distribution d = stationary_distribution(P);
    CHECK(d[0] == doctest::Approx(0.5));
    CHECK(d[1] == doctest::Approx(0.5));
  }
  SUBCASE("Gaussian target satisfies detailed balance") {
    const auto t = CompactTarget::truncated_gaussian({-3.0}, {3.0}, 50);
    const auto built = build_discrete_rwm_detailed(t, RwmParameter::scalar(1.0));
    CHECK(detailed_balance_residual(built.kernel, built.pi) <= 1e-10);
    // Independent check by brute force.
    const auto dense = oracle::to_dense(built.kernel);
    double worst = 0.0;
    for (std::size_t i = 0; i < 50; ++i)
      for (std::size_t j = 0; j < 50; ++j)
        worst = std::max(worst, std::fabs(built.pi[i] * dense[i][j] - built.pi[j] * dense[j][i]));
    CHECK(worst <= 1e-10);
    CHECK(invariance_residual(built.kernel, built.pi.weights()) <= 1e-12);
  }
  SUBCASE("bimodal target in two dimensions") {
    const auto t = CompactTarget::bimodal_mixture({-3.0, -3.0}, {3.0, 3.0}, 12);
    Eigen::MatrixXd S(2, 2);
    S << 0.8, 0.3, 0.3, 0.5;
    const auto built = build_discrete_rwm_detailed(t, RwmParameter(S));
    CHECK(detailed_balance_residual(built.kernel, built.pi) <= 1e-10);
    for (double a : built.acceptance) {
      CHECK(a >= 0.0);
      CHECK(a <= 1.0);
    }
  }
  SUBCASE("same parameter, same matrix") {
    const auto t = CompactTarget::bimodal_mixture({-3.0}, {3.0}, 40);
    CHECK(build_discrete_rwm(t, RwmParameter::scalar(0.7)) ==
          build_discrete_rwm(t, RwmParameter::scalar(0.7)));
  }
  SUBCASE("errors") {
    const auto big = CompactTarget::uniform({0.0, 0.0}, {1.0, 1.0}, 200);
    try {
      build_discrete_rwm(big, RwmParameter(Eigen::MatrixXd::Identity(2, 2)));
      FAIL("expected GridTooLarge");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::GridTooLarge);
    }
    try {
      CompactTarget::table({0.0}, {1.0}, 3, {1.0, 0.0, 2.0});
      FAIL("expected NonPositiveDensity");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NonPositiveDensity);
    }
    Eigen::MatrixXd asym(2, 2);
    asym << 1.0, 0.5, 0.0, 1.0;
    CHECK_THROWS_AS(RwmParameter{asym}, std::invalid_argument);
    CHECK_THROWS_AS(RwmParameter(Eigen::MatrixXd::Identity(2, 2), 2.0, 3.0),
                    std::invalid_argument);
  }
}

TEST_CASE("continuous lane moves") {
  SUBCASE("uniform target accepts every in-box proposal") {
    const auto t = CompactTarget::uniform({-1.0}, {1.0}, 10);
    CounterRng rng(5);
    const RwmParameter p = RwmParameter::scalar(0.09);
    std::vector<double> x{0.0};
    for (int k = 0; k < 2000; ++k) {
      const RwmMove mv = rwm_propose_accept(x, p, t, rng);
      CHECK(mv.proposal[0] == doctest::Approx(x[0] + 0.3 * mv.Z(0)).epsilon(1e-14));
      if (t.in_box(mv.proposal)) {
        CHECK(mv.alpha == 1.0);
        CHECK(mv.accepted);
        CHECK(mv.next == mv.proposal);
      } else {
        CHECK(mv.alpha == 0.0);
        CHECK_FALSE(mv.accepted);
        CHECK(mv.next == x);
      }
      x = mv.next;
    }
  }
  SUBCASE("uphill moves have alpha = 1 and draws are ordered Z then U") {
    const auto t = CompactTarget::truncated_gaussian({-3.0}, {3.0}, 10);
    CounterRng rng(9);
    std::vector<double> x{2.0};
    for (int k = 0; k < 500; ++k) {
      const std::uint64_t before = rng.counter();
      const RwmMove mv = rwm_propose_accept(x, RwmParameter::scalar(1.0), t, rng);
      CHECK(rng.counter() - before == 3);  // two for the normal, one for the uniform
      if (t.in_box(mv.proposal) && std::fabs(mv.proposal[0]) <= std::fabs(x[0])) {
        CHECK(mv.alpha == 1.0);
      }
      x = mv.next;
    }
  }
  SUBCASE("acceptance rate matches the discrete-lane expectation within 2%") {
    const auto t = CompactTarget::truncated_gaussian({-3.0}, {3.0}, 200);
    const RwmParameter p = RwmParameter::scalar(1.0);
    const double exact = build_discrete_rwm_detailed(t, p).mean_acceptance();
    const double rate = continuous_acceptance_rate(t, p, {0.0}, 100000, 2024);
    CHECK(std::fabs(rate / exact - 1.0) <= 0.02);
  }
}

TEST_CASE("Lipschitz surrogate") {
  const RwmParameter a = RwmParameter::scalar(1.0);
  CHECK(lipschitz_surrogate(a, a, 5.0) == 0.0);
  CHECK(lipschitz_surrogate(RwmParameter::scalar(1.1), a, 2.0) == doctest::Approx(0.2));
  CHECK(lipschitz_surrogate(RwmParameter::scalar(3.0), a, 2.0) == 1.0);

  SUBCASE("fitted L dominates exact kernel distances on a finer grid") {
    const auto t = CompactTarget::truncated_gaussian({-3.0}, {3.0}, 40);
    std::vector<RwmParameter> grid;
    for (double v : {0.25, 0.5, 1.0, 2.0, 4.0}) grid.push_back(RwmParameter::scalar(v));
    const double L = fit_lipschitz_constant(t, grid);
    CHECK(L > 0.0);
    std::vector<StochasticMatrix> kernels;
    std::vector<double> vs;
    for (double v = 0.25; v <= 4.0; v += 0.25) {
      vs.push_back(v);
      kernels.push_back(build_discrete_rwm(t, RwmParameter::scalar(v)));
    }
    for (std::size_t i = 0; i < vs.size(); ++i) {
      for (std::size_t j = 0; j < vs.size(); ++j) {
        const double D = max_tv_between_kernels(kernels[i], kernels[j]);
        const double surrogate = lipschitz_surrogate(RwmParameter::scalar(vs[i]),
                                                     RwmParameter::scalar(vs[j]), L);
        // Discretization slack: the fit sees only the coarse grid.
        CHECK(D <= 2.0 * surrogate + 1e-12);
      }
    }
  }
}

TEST_CASE("eigenbox updates yield valid proposal covariances") {
  CounterRng rng(13);
  const ParameterSpace box = ParameterSpace::eigenbox(0.1, 5.0, 2);
  SAState st;
  st.S = Eigen::MatrixXd::Identity(2, 2);
  st.gamma = GammaSchedule::ram_default();
  for (int k = 0; k < 200; ++k) {
    Eigen::VectorXd z(2);
    z << rng.normal(), rng.normal();
    const Eigen::MatrixXd factor = Eigen::LLT<Eigen::MatrixXd>(st.S).matrixL();
    st = sa_step(st, ram_field(z, rng.uniform(), 0.234, factor), box, ConstraintMode::Reject);
    CHECK_NOTHROW(RwmParameter(st.S, 0.1, 5.0));
  }
}
