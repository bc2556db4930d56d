#include <doctest.h>

#include <cmath>
#include <vector>

#include "amcmc/error.hpp"
#include "amcmc/family.hpp"
#include "amcmc/ledger.hpp"
#include "amcmc/rwm.hpp"
#include "oracles.hpp"

using namespace amcmc;

namespace {

const Distribution kPi({0.5, 0.25, 0.25});

KernelFamily rwm_family() {
  return families::rwm_variances(CompactTarget::bimodal_mixture({-3.0}, {3.0}, 24),
                                 {0.05, 0.1, 0.2, 0.4, 0.8, 1.6, 3.2});
}

TestFunction coordinate_indicator(const KernelFamily& fam) {
  std::vector<double> v(fam.num_states());
  for (std::size_t x = 0; x < v.size(); ++x) v[x] = fam.coordinate(x) > 0.0 ? 1.0 : 0.0;
  return TestFunction(v, fam.pi());
}

void check_ledger_invariants(const KernelFamily& fam, const TestFunction& phi,
                             const Trajectory& t) {
  const PoissonOracle oracle(fam, phi);
  const DecompositionLedger L = decompose(t, fam, oracle);
  REQUIRE(L.length() == t.length());

  // Direct summation of the left-hand side as an independent oracle.
  double lhs = 0.0;
  for (std::size_t k = 1; k <= t.length(); ++k) {
    lhs += phi(t.X[k]) - phi.mean_under_pi();
    const double rhs = L.M[k - 1] + L.A[k - 1] + L.R[k - 1];
    CHECK(std::fabs(rhs - lhs) <= 1e-9 * double(k));
  }
  CHECK(L.max_identity_error_per_step() <= 1e-9);
  CHECK(L.max_telescoping_error() <= 1e-10);

  const MartingaleReport m = martingale_check(t, L, fam, oracle);
  CHECK(m.max_abs_conditional_mean <= 1e-10);
  CHECK(m.max_conditional_variance_error <= 1e-10);

  // D_k is the exact kernel distance and vanishes when the member is unchanged.
  for (std::size_t k = 1; k <= t.length(); ++k) {
    if (t.S[k] == t.S[k - 1]) {
      CHECK(L.D[k - 1] == 0.0);
    } else {
      const auto a = oracle::to_dense(fam[t.S[k]]), b = oracle::to_dense(fam[t.S[k - 1]]);
      double d = 0.0;
      for (std::size_t x = 0; x < a.size(); ++x) d = std::max(d, oracle::tv(a[x], b[x]));
      CHECK(L.D[k - 1] == doctest::Approx(d).epsilon(1e-12));
    }
  }

  const ErgodicityConstants& c = oracle.constants();
  CHECK(L.max_abs_delta() <= 2.0 * c.C * phi.osc() / (1.0 - c.rho) + 1e-9);
}

}  // namespace

TEST_CASE("decomposition on the counterexample schedule") {
  const auto fam = families::cyclic_counterexample();
  SchemeSpec cyc;
  cyc.kind = SchemeSpec::Kind::Cyclic;
  cyc.sequence = {0, 1};
  const TestFunction phi = TestFunction::indicator(0, kPi);
  const Trajectory t = run_adaptive_chain(fam, cyc, 1, 0, 200, 1);
  check_ledger_invariants(fam, phi, t);
  // The average of 1(x = 1) is pinned at 0, so the centered sum is -n/2.
  const PoissonOracle oracle(fam, phi);
  const auto L = decompose(t, fam, oracle);
  CHECK(L.centered_sum.back() == doctest::Approx(-100.0));
}

TEST_CASE("constant scheme has A_n = 0") {
  const auto rf = rwm_family();
  const TestFunction phi = coordinate_indicator(rf);
  const Trajectory t = run_adaptive_chain(rf, SchemeSpec{}, 5, 3, 2000, 11);
  const PoissonOracle oracle(rf, phi);
  const auto L = decompose(t, rf, oracle);
  for (double a : L.A) CHECK(a == 0.0);
  for (double d : L.D) CHECK(d == 0.0);
  check_ledger_invariants(rf, phi, t);
}

TEST_CASE("single step identity is exact") {
  const auto rf = rwm_family();
  const TestFunction phi = coordinate_indicator(rf);
  SchemeSpec ram;
  ram.kind = SchemeSpec::Kind::Ram;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Trajectory t = run_adaptive_chain(rf, ram, 12, 2, 1, seed);
    const PoissonOracle oracle(rf, phi);
    const auto L = decompose(t, rf, oracle);
    CHECK(L.M[0] + L.A[0] + L.R[0] ==
          doctest::Approx(phi(t.X[1]) - phi.mean_under_pi()).epsilon(1e-14));
  }
}

TEST_CASE("adaptive schemes satisfy every ledger invariant") {
  const auto rf = rwm_family();
  const TestFunction phi = coordinate_indicator(rf);
  SchemeSpec am;
  am.kind = SchemeSpec::Kind::Am;
  SchemeSpec ram;
  ram.kind = SchemeSpec::Kind::Ram;
  SchemeSpec rare = ram;
  rare.rare = RareSpec{};
  SchemeSpec bern = am;
  bern.rare = RareSpec{RareSchedule::Kind::BernoulliActivation, 2.0, 0.1};
  for (const SchemeSpec* spec : {&am, &ram, &rare, &bern}) {
    CAPTURE(to_string(spec->kind));
    const Trajectory t = run_adaptive_chain(rf, *spec, 12, 0, 10000, 21);
    check_ledger_invariants(rf, phi, t);
  }
}

TEST_CASE("conditional variance of an iid kernel is Var_pi(phi)") {
  const auto iid = families::independent(kPi);
  const TestFunction phi = TestFunction::indicator(0, kPi);
  const Trajectory t = run_adaptive_chain(iid, SchemeSpec{}, 0, 0, 500, 3);
  const auto L = decompose(t, iid, PoissonOracle(iid, phi));
  for (double v : L.cond_var) CHECK(v == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("oracle variants") {
  const auto rf = rwm_family();
  const TestFunction phi = coordinate_indicator(rf);
  SchemeSpec ram;
  ram.kind = SchemeSpec::Kind::Ram;
  const Trajectory t = run_adaptive_chain(rf, ram, 12, 0, 2000, 2);

  SUBCASE("precomputed oracle without a visited member") {
    const auto oracle = PoissonOracle::precomputed(rf, phi, {0});
    try {
      decompose(t, rf, oracle);
      FAIL("expected MissingSolution");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::MissingSolution);
    }
  }
  SUBCASE("Neumann oracle agrees with the exact one") {
    const PoissonOracle exact(rf, phi);
    const PoissonOracle series(rf, phi, PoissonOracle::Method::Neumann, 1e-11);
    const auto a = decompose(t, rf, exact);
    const auto b = decompose(t, rf, series);
    for (std::size_t k = 0; k < a.length(); ++k) {
      CHECK(std::fabs(a.Delta[k] - b.Delta[k]) <= 1e-9);
    }
  }
}

TEST_CASE("law of large numbers study") {
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t s = 0; s < 32; ++s) seeds.push_back(derive_seed(7, s));
  SUBCASE("iid kernel decays like n^-1/2") {
    const auto iid = families::independent(kPi);
    const TestFunction phi = TestFunction::indicator(0, kPi);
    ChainConfig cfg{&iid, SchemeSpec{}, 0, 0, &phi};
    const LlnTable tab = lln_study(cfg, {1000, 10000, 100000}, seeds, 2);
    CHECK(tab.loglog_slope >= -0.6);
    CHECK(tab.loglog_slope <= -0.4);
    CHECK(tab.decreasing);
  }
  SUBCASE("counterexample is pinned at 1/2") {
    const auto fam = families::cyclic_counterexample();
    const TestFunction phi = TestFunction::indicator(0, kPi);
    SchemeSpec cyc;
    cyc.kind = SchemeSpec::Kind::Cyclic;
    cyc.sequence = {0, 1};
    ChainConfig cfg{&fam, cyc, 1, 0, &phi};
    const LlnTable tab = lln_study(cfg, {10, 1000, 100000}, {1, 2, 3});
    for (const auto& row : tab.errors)
      for (double e : row) CHECK(e == 0.5);
    CHECK_FALSE(tab.decreasing);
  }
  SUBCASE("rare adaptation errors decrease") {
    const auto rf = rwm_family();
    const TestFunction phi = coordinate_indicator(rf);
    SchemeSpec ram;
    ram.kind = SchemeSpec::Kind::Ram;
    ram.rare = RareSpec{};
    ChainConfig cfg{&rf, ram, 12, 0, &phi};
    const LlnTable tab = lln_study(cfg, {1000, 10000, 100000}, seeds, 2);
    CHECK(tab.decreasing);
    CHECK(tab.median_error[1] < tab.median_error[0]);
    CHECK(tab.median_error[2] < tab.median_error[1]);
  }
  SUBCASE("thread count does not change the table") {
    const auto iid = families::independent(kPi);
    const TestFunction phi = TestFunction::indicator(0, kPi);
    ChainConfig cfg{&iid, SchemeSpec{}, 0, 0, &phi};
    const auto a = lln_study(cfg, {100, 1000}, seeds, 1);
    const auto b = lln_study(cfg, {100, 1000}, seeds, 4);
    CHECK(a.errors == b.errors);
  }
}

TEST_CASE("central limit theorem study") {
  SUBCASE("constant phi") {
    const auto iid = families::independent(kPi);
    const TestFunction phi({1.0, 1.0, 1.0}, kPi);
    ChainConfig cfg{&iid, SchemeSpec{}, 0, 0, &phi};
    const CltSummary s = clt_study(cfg, 100, 20, 1);
    for (double r : s.replicates) CHECK(r == 0.0);
    CHECK(s.sigma2_oracle == 0.0);
  }
  SUBCASE("iid kernel matches the binomial variance") {
    const auto iid = families::independent(kPi);
    const TestFunction phi = TestFunction::indicator(0, kPi);
    ChainConfig cfg{&iid, SchemeSpec{}, 0, 0, &phi};
    const CltSummary s = clt_study(cfg, 10000, 1000, 2024, 2);
    CHECK(s.sigma2_oracle == doctest::Approx(0.25));
    CHECK(std::fabs(s.ratio - 1.0) <= 0.15);
    // KS critical value at 1% for R = 1000 is about 0.05.
    CHECK(s.ks_statistic < 0.05);
  }
  SUBCASE("degenerate oracle variance with a noisy chain") {
    const Distribution half({0.5, 0.5});
    const StochasticMatrix flip({{0.0, 1.0}, {1.0, 0.0}});
    const KernelFamily fam({StochasticMatrix::independent(half), flip}, half);
    const TestFunction phi({1.0, 0.0}, half);
    CHECK(clt_variance(flip, half, phi) <= 1e-15);
    SchemeSpec cyc;
    cyc.kind = SchemeSpec::Kind::Cyclic;
    cyc.sequence = {0, 1};
    ChainConfig cfg{&fam, cyc, 0, 0, &phi};
    try {
      clt_study(cfg, 101, 50, 3);
      FAIL("expected DegenerateVariance");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DegenerateVariance);
    }
  }
}

TEST_CASE("A_n second moment bound") {
  SUBCASE("constant sequence gives A_n = 0") {
    CounterRng rng(3);
    const auto fam = families::smoothed(families::cyclic_counterexample(), 0.2);
    const TestFunction phi = TestFunction::indicator(0, kPi);
    const auto r = an_bound_check({0}, fam, phi, 1000, 20, 1);
    CHECK(r.raw_second_moment == 0.0);
    CHECK(r.pass);
  }
  SUBCASE("smoothed counterexample kernels restore beta < 1") {
    const auto fam = families::smoothed(families::cyclic_counterexample(), 0.2);
    const TestFunction phi = TestFunction::indicator(0, kPi);
    const auto r = an_bound_check({0, 1}, fam, phi, 1000, 200, 9);
    CHECK(r.beta == doctest::Approx(0.8));
    CHECK(r.C_prime == doctest::Approx(2.0 / 0.2));
    CHECK(r.pass);
    CHECK(r.estimate > 0.0);
  }
  SUBCASE("raw counterexample kernels violate the Dobrushin condition") {
    const auto fam = families::cyclic_counterexample();
    try {
      an_bound_check({0, 1}, fam, TestFunction::indicator(0, kPi), 100, 10, 1);
      FAIL("expected DobrushinViolation");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DobrushinViolation);
    }
  }
}
