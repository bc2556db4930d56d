#include <doctest.h>

#include <cmath>
#include <vector>

#include "amcmc/error.hpp"
#include "amcmc/family.hpp"
#include "amcmc/poisson.hpp"
#include "oracles.hpp"

using namespace amcmc;

namespace {

const Distribution kPi({0.5, 0.25, 0.25});

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

std::vector<double> random_values(std::size_t n, CounterRng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = 4.0 * rng.uniform() - 2.0;
  return v;
}

}  // namespace

TEST_CASE("test function bookkeeping") {
  const TestFunction phi({1.0, 0.0, 0.0}, kPi);
  CHECK(phi.mean_under_pi() == 0.5);
  CHECK(phi.osc() == 1.0);
  CHECK(std::fabs(kPi.mean(phi.centered())) <= 1e-15);
  const TestFunction ind = TestFunction::indicator(0, kPi);
  CHECK(ind(0) == 1.0);
  CHECK(ind(2) == 0.0);
}

TEST_CASE("exact solve on closed-form cases") {
  const auto fam = families::cyclic_counterexample();
  SUBCASE("constant phi gives g = 0") {
    const TestFunction phi({2.0, 2.0, 2.0}, kPi);
    const auto sol = solve_poisson_exact(fam[0], kPi, phi);
    for (double v : sol.g) CHECK(std::fabs(v) <= 1e-14);
  }
  SUBCASE("iid kernel gives g = phi_bar") {
    const TestFunction phi({3.0, -1.0, 0.5}, kPi);
    const auto sol = solve_poisson_exact(StochasticMatrix::independent(kPi), kPi, phi);
    for (std::size_t x = 0; x < 3; ++x) CHECK(sol.g[x] == doctest::Approx(phi.centered()[x]));
  }
  SUBCASE("P_a against the Neumann series") {
    const TestFunction phi = TestFunction::indicator(0, kPi);
    const auto sol = solve_poisson_exact(fam[0], kPi, phi);
    const auto ref = oracle::neumann(oracle::to_dense(fam[0]),
                                     {phi.centered().begin(), phi.centered().end()}, 4000);
    CHECK(sup_diff(sol.g, ref) <= 1e-8);
    CHECK(sol.residual_inf_norm <= 1e-12);
  }
  SUBCASE("reducible kernel is rejected") {
    const Distribution half({0.5, 0.5});
    const TestFunction phi({1.0, 0.0}, half);
    try {
      solve_poisson_exact(StochasticMatrix::identity(2), half, phi);
      FAIL("expected SingularBeyondCentering");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::SingularBeyondCentering);
    }
  }
}

TEST_CASE("residual and centering on random ergodic kernels") {
  CounterRng rng(41);
  for (std::size_t n : {2u, 5u, 13u, 31u, 50u}) {
    for (int rep = 0; rep < 4; ++rep) {
      const StochasticMatrix P = random_kernels::positive(n, rng);
      const Distribution pi = stationary_distribution(P);
      const TestFunction phi(random_values(n, rng), pi);
      const auto sol = solve_poisson_exact(P, pi, phi);
      // Residual recomputed independently of the solver.
      const auto Pg = oracle::apply(oracle::to_dense(P), sol.g);
      for (std::size_t x = 0; x < n; ++x) {
        CHECK(std::fabs(sol.g[x] - Pg[x] - phi.centered()[x]) <= 1e-10);
      }
      CHECK(std::fabs(pi.mean(sol.g)) <= 1e-10);
      CHECK(sup_diff(sol.Pg, Pg) <= 1e-13);
    }
  }
}

TEST_CASE("Neumann series") {
  SUBCASE("constant phi terminates at K = 0") {
    const std::vector<StochasticMatrix> one{StochasticMatrix::independent(kPi)};
    const auto c = fit_ergodicity_constants(one, kPi, 4);
    const auto sol = solve_poisson_neumann(one[0], kPi, TestFunction({1.0, 1.0, 1.0}, kPi), c, 1e-9);
    CHECK(sol.terms == 1);  // K = 0: only phi_bar itself
    for (double v : sol.g) CHECK(v == 0.0);
  }
  SUBCASE("iid kernel: only the first term is nonzero") {
    const std::vector<StochasticMatrix> one{StochasticMatrix::independent(kPi)};
    const auto c = fit_ergodicity_constants(one, kPi, 4);
    const TestFunction phi({1.0, 0.0, 0.0}, kPi);
    const auto sol = solve_poisson_neumann(one[0], kPi, phi, c, 1e-9);
    for (std::size_t x = 0; x < 3; ++x) CHECK(sol.g[x] == doctest::Approx(phi.centered()[x]));
  }
  SUBCASE("random 8-state kernels agree with the exact solve within 2 tol") {
    CounterRng rng(43);
    for (int rep = 0; rep < 10; ++rep) {
      const StochasticMatrix P = random_kernels::positive(8, rng);
      const Distribution pi = stationary_distribution(P);
      const std::vector<StochasticMatrix> one{P};
      const auto c = fit_ergodicity_constants(one, pi, 32);
      const TestFunction phi(random_values(8, rng), pi);
      const auto exact = solve_poisson_exact(P, pi, phi);
      const auto series = solve_poisson_neumann(P, pi, phi, c, 1e-9);
      CHECK(sup_diff(exact.g, series.g) <= 2e-9);
      CHECK(series.terms == neumann_truncation_index(c, phi.osc(), 1e-9) + 1);
    }
  }
  SUBCASE("truncation index is the smallest certified K") {
    const ErgodicityConstants c{2.0, 0.5, 0.5, 8, 1};
    const std::size_t K = neumann_truncation_index(c, 1.0, 1e-6);
    auto tail = [&](std::size_t k) { return 2.0 * std::pow(0.5, double(k + 1)) / 0.5; };
    CHECK(tail(K) <= 1e-6);
    CHECK(tail(K - 1) > 1e-6);
  }
  SUBCASE("rho = 1 has no contraction") {
    const ErgodicityConstants c{1.0, 1.0, 1.0, 8, 1};
    try {
      solve_poisson_neumann(StochasticMatrix::independent(kPi), kPi,
                            TestFunction({1.0, 0.0, 0.0}, kPi), c, 1e-9);
      FAIL("expected NoContraction");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NoContraction);
    }
  }
}

TEST_CASE("norm and Lipschitz bounds") {
  SUBCASE("constant phi has margin equal to the bound") {
    const auto fam = families::cyclic_counterexample();
    const auto c = fit_ergodicity_constants(fam.kernels(), kPi, 64);
    const TestFunction phi({1.0, 1.0, 1.0}, kPi);
    const auto r = check_poisson_bound(solve_poisson_exact(fam[0], kPi, phi), c, phi);
    CHECK(r.pass);
    CHECK(r.value == 0.0);
    CHECK(r.margin == r.bound);
  }
  SUBCASE("iid kernel with C = 1, rho = 0") {
    const TestFunction phi({3.0, -1.0, 0.5}, kPi);
    const ErgodicityConstants c{1.0, 0.0, 0.0, 2, 1};
    const auto r = check_poisson_bound(
        solve_poisson_exact(StochasticMatrix::independent(kPi), kPi, phi), c, phi);
    CHECK(r.pass);
    CHECK(r.bound == phi.osc());
  }
  SUBCASE("counterexample pair") {
    const auto fam = families::cyclic_counterexample();
    const auto c = fit_ergodicity_constants(fam.kernels(), kPi, 64);
    const TestFunction phi = TestFunction::indicator(0, kPi);
    const auto ga = solve_poisson_exact(fam[0], kPi, phi);
    const auto gb = solve_poisson_exact(fam[1], kPi, phi);
    CHECK(check_poisson_bound(ga, c, phi).pass);
    CHECK(check_poisson_bound(gb, c, phi).pass);
    const double D = max_tv_between_kernels(fam[0], fam[1]);
    CHECK(D == 1.0);
    CHECK(check_lipschitz_bound(ga, gb, D, c, phi).pass);
    CHECK(check_lipschitz_bound_Pg(ga, gb, D, c, phi).pass);
    const auto same = check_lipschitz_bound(ga, ga, 0.0, c, phi);
    CHECK(same.value == 0.0);
    CHECK(same.bound == 0.0);
    CHECK(same.pass);
  }
  SUBCASE("convex mixture t-grid") {
    CounterRng rng(47);
    const Distribution pi = random_kernels::distribution(6, rng);
    const auto fam = families::convex_mixture(random_kernels::reversible(pi, rng, 0.2),
                                              random_kernels::reversible(pi, rng, 0.2), pi, 10);
    const auto c = fit_ergodicity_constants(fam.kernels(), pi, 64);
    const TestFunction phi(random_values(6, rng), pi);
    std::vector<PoissonSolution> sols;
    for (const auto& P : fam.kernels()) sols.push_back(solve_poisson_exact(P, pi, phi));
    for (std::size_t i = 0; i < fam.size(); ++i) {
      CHECK(check_poisson_bound(sols[i], c, phi).pass);
      for (std::size_t j = 0; j < fam.size(); ++j) {
        const double D = max_tv_between_kernels(fam[i], fam[j]);
        const auto r = check_lipschitz_bound(sols[i], sols[j], D, c, phi);
        CHECK(r.pass);
        CHECK(check_lipschitz_bound_Pg(sols[i], sols[j], D, c, phi).pass);
        if (i + 1 == j) CHECK(r.value < 0.5 * r.bound);
      }
    }
  }
}

TEST_CASE("asymptotic variance") {
  SUBCASE("constant phi") {
    CHECK(clt_variance(StochasticMatrix::independent(kPi), kPi, TestFunction({1.0, 1.0, 1.0}, kPi)) ==
          0.0);
  }
  SUBCASE("iid kernel equals Var_pi(phi) = 1/4") {
    CHECK(clt_variance(StochasticMatrix::independent(kPi), kPi, TestFunction::indicator(0, kPi)) ==
          doctest::Approx(0.25).epsilon(1e-14));
  }
  SUBCASE("reversible kernels match the spectral formula") {
    CounterRng rng(53);
    for (int rep = 0; rep < 20; ++rep) {
      const std::size_t n = 2 + rep % 7;
      const Distribution pi = random_kernels::distribution(n, rng);
      const StochasticMatrix P = random_kernels::reversible(pi, rng, 0.05);
      const auto values = random_values(n, rng);
      const double s2 = clt_variance(P, pi, TestFunction(values, pi));
      CHECK(s2 >= 0.0);
      const double ref = oracle::spectral_variance(oracle::to_dense(P),
                                                   {pi.weights().begin(), pi.weights().end()}, values);
      CHECK(std::fabs(s2 - ref) <= 1e-8);
    }
  }
  SUBCASE("P_a against batch means on a long run") {
    const auto fam = families::cyclic_counterexample();
    const TestFunction phi = TestFunction::indicator(0, kPi);
    const double s2 = clt_variance(fam[0], kPi, phi);
    const auto xs = oracle::simulate(oracle::to_dense(fam[0]), 0, 2'000'000, 99);
    std::vector<double> f;
    f.reserve(xs.size() - 1);
    for (std::size_t k = 1; k < xs.size(); ++k) f.push_back(phi(xs[k]));
    const double bm = oracle::batch_means(f, 1000);
    CHECK(std::fabs(bm / s2 - 1.0) <= 0.10);
  }
}
