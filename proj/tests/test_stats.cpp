#include "doctest.h"

#include <cmath>

#include "cclab/rng.hpp"
#include "cclab/stats.hpp"

using namespace cclab;

TEST_SUITE("stats") {

TEST_CASE("gamma_q matches the chi-square closed forms") {
  // chi2 with 1 dof: Q(x) = erfc(sqrt(x/2))
  for (double x : {0.1, 1.0, 2.7, 6.63, 10.8}) {
    CHECK(chi2_sf(x, 1) == doctest::Approx(std::erfc(std::sqrt(x / 2))).epsilon(1e-12));
  }
  // chi2 with 2 dof: Q(x) = exp(-x/2)
  for (double x : {0.5, 1.0, 4.0, 9.0}) {
    CHECK(chi2_sf(x, 2) == doctest::Approx(std::exp(-x / 2)).epsilon(1e-12));
  }
  // textbook critical value: P(chi2_3 > 7.815) = 0.05
  CHECK(chi2_sf(7.815, 3) == doctest::Approx(0.05).epsilon(1e-3));
}

TEST_CASE("normal_quantile inverts the normal CDF") {
  for (double p : {1e-6, 0.01, 0.2, 0.5, 0.7, 0.99, 1.0 - 1e-6}) {
    const double x = normal_quantile(p);
    const double back = 0.5 * std::erfc(-x / std::numbers::sqrt2);
    CHECK(back == doctest::Approx(p).epsilon(1e-12));
  }
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0));
  CHECK_THROWS_AS(normal_quantile(0.0), PreconditionError);
}

TEST_CASE("chi2 independence on fair coin pairs") {
  RngStream rng(12121);
  std::vector<std::pair<int, int>> pairs(100000);
  for (auto& [a, b] : pairs) {
    a = rng.bernoulli(0.5);
    b = rng.bernoulli(0.5);
  }
  const Chi2Result indep = chi2_independence(pairs);
  CHECK(indep.dof == 1);
  CHECK(indep.p_value > 0.01);

  // perfectly correlated pairs are detected
  for (auto& [a, b] : pairs) b = a;
  CHECK(chi2_independence(pairs).p_value < 1e-10);

  CHECK_THROWS_AS(chi2_independence({{0, 0}}), PreconditionError);
}

TEST_CASE("chi2 goodness of fit") {
  RngStream rng(555);
  std::vector<int> samples(50000);
  for (int& s : samples) s = rng.bernoulli(0.5);
  CHECK(chi2_goodness(samples, {0.5, 0.5}).p_value > 0.01);
  CHECK(chi2_goodness(samples, {0.9, 0.1}).p_value < 1e-10);
}

TEST_CASE("ks_uniform") {
  RngStream rng(777);
  std::vector<double> u(100000);
  for (double& v : u) v = rng.uniform();
  CHECK(ks_uniform(u) > 0.01);

  // identical constant samples: degenerate, p collapses
  std::vector<double> constant(1000, 0.3);
  CHECK(ks_uniform(constant) < 1e-10);

  // squashed distribution fails
  for (double& v : u) v = 0.5 * v;
  CHECK(ks_uniform(u) < 1e-10);
}

TEST_CASE("autocorr") {
  RngStream rng(999);
  std::vector<double> x(100000);
  for (double& v : x) v = rng.normal();
  CHECK(std::abs(autocorr(x, 1)) < 0.01);

  // an AR(1) signal shows its coefficient
  std::vector<double> ar(100000);
  ar[0] = rng.normal();
  for (std::size_t i = 1; i < ar.size(); ++i) ar[i] = 0.8 * ar[i - 1] + rng.normal();
  CHECK(autocorr(ar, 1) == doctest::Approx(0.8).epsilon(0.02));

  CHECK_THROWS_AS(autocorr({1.0, 2.0}, 1), PreconditionError);
}

TEST_CASE("rng streams are reproducible and disjoint") {
  RngStream a(42, 0), b(42, 0), c(42, 1);
  for (int i = 0; i < 100; ++i) {
    const double va = a.uniform();
    CHECK(va == b.uniform());
    CHECK(va != c.uniform());
  }
  // normals come in reproducible pairs too
  RngStream d(42, 0), e(42, 0);
  for (int i = 0; i < 100; ++i) CHECK(d.normal() == e.normal());
}

TEST_CASE("rng uniform moments") {
  RngStream rng(2718);
  double sum = 0.0, sum2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    sum += u;
    sum2 += u * u;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(sum2 / n - 0.25 == doctest::Approx(1.0 / 12).epsilon(0.02));
}

}  // TEST_SUITE
