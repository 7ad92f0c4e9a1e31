#include "doctest.h"

#include <cmath>

#include "cclab/models.hpp"
#include "cclab/rng.hpp"

using namespace cclab;

TEST_SUITE("models") {

TEST_CASE("channel presets") {
  const StochKernel b = bsc(0.1);
  CHECK(b(0, 0) == doctest::Approx(0.9));
  CHECK(b(0, 1) == doctest::Approx(0.1));

  const StochKernel ie = inverted_e_channel();
  CHECK(ie(0, 1) == doctest::Approx(0.0));
  CHECK(ie(1, 0) == doctest::Approx(0.5));
  CHECK(ie(1, 1) == doctest::Approx(0.5));
  CHECK(ie(2, 1) == doctest::Approx(1.0));

  const StochKernel z0 = z_channel(0.0, 4);
  for (int x = 0; x < 4; ++x) CHECK(z0(x, 0) == doctest::Approx(1.0));

  CHECK_THROWS_AS(bsc(1.5), ModelError);
  CHECK_THROWS_AS(z_channel(-0.1), ModelError);
}

TEST_CASE("queue source: paper initial law and kernel") {
  const QueueModel q(0.5, 1.0, 0.01, 60);
  const MarkovSource src = queue_source(q);
  CHECK(src.initial(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(src.initial(1) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(src.kernel(3, 4) == doctest::Approx(0.005));
  CHECK(src.kernel(3, 3) == doctest::Approx(0.995));
}

TEST_CASE("queue model: truncation certificate") {
  // lambda=0.3, mu=1, K=40: tail mass 0.3^41 < 1e-10
  const QueueModel ok(0.3, 1.0, 0.01, 40);
  CHECK(ok.tail_mass() < 1e-10);
  CHECK_THROWS_AS(QueueModel(0.9, 1.0, 0.01, 40), ModelError);  // 0.9^41 too heavy
}

TEST_CASE("queue: geometric law satisfies rate-chain detailed balance") {
  const QueueModel q(0.5, 1.0, 0.01, 60);
  const MarkovSource src = queue_source(q);
  const double ld = q.lambda * q.delta, md = q.mu * q.delta;
  for (int k = 0; k + 1 < 60; ++k)
    CHECK(std::abs(src.initial(k) * ld - src.initial(k + 1) * md) < 1e-12);
}

TEST_CASE("queue: chain stationary law is a fixed point of the sampled chain") {
  const QueueModel q(0.5, 1.0, 0.01, 60);
  const FiniteDist pi = queue_chain_stationary(q);
  const StochKernel chain = queue_length_chain(q);
  const FiniteDist next = chain.push(pi);
  for (int k = 0; k <= 60; ++k) CHECK(std::abs(next(k) - pi(k)) < 1e-14);
  // and it differs from the geometric law at O(delta)
  const MarkovSource src = queue_source(q);
  CHECK(std::abs(pi(1) - src.initial(1)) > 1e-4);
  CHECK(std::abs(pi(0) - 0.5) < 1e-12);  // the zero-state mass is delta-free
}

TEST_CASE("queue: loop-initial law plus one arrival reproduces the chain law") {
  const QueueModel q(0.5, 1.0, 0.01, 60);
  const FiniteDist w0 = queue_exact_stationary(q);
  const FiniteDist pi = queue_chain_stationary(q);
  const double ld = q.lambda * q.delta;
  Vector x1 = Vector::Zero(61);
  for (int k = 0; k <= 60; ++k) {
    x1(k) += w0(k) * (1.0 - (k < 60 ? ld : 0.0));
    if (k + 1 <= 60) x1(k + 1) += w0(k) * (k < 60 ? ld : 0.0);
  }
  for (int k = 0; k <= 60; ++k) CHECK(std::abs(x1(k) - pi(k)) < 1e-15);
}

TEST_CASE("trapdoor laws") {
  const TrapdoorLaws laws = trapdoor_source_and_init(TrapdoorModel(0.5));
  CHECK(laws.initial_state(0) == doctest::Approx(0.25));
  CHECK(laws.initial_state(1) == doctest::Approx(0.5));
  CHECK(laws.initial_state(2) == doctest::Approx(0.25));
  CHECK(laws.transition(1, 0) == doctest::Approx(0.25));
  CHECK(laws.transition(1, 1) == doctest::Approx(0.5));
  CHECK(laws.transition(1, 2) == doctest::Approx(0.25));
  // rows sum to one for any p (StochKernel validates); stationarity pi P = pi
  for (double p : {0.2, 0.5, 0.8}) {
    const TrapdoorLaws l = trapdoor_source_and_init(TrapdoorModel(p));
    const FiniteDist pushed = l.transition.push(l.initial_state);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(pushed(i) - l.initial_state(i)) < 1e-14);
  }
}

TEST_CASE("gaussian steady state closed forms") {
  const GaussianModel g = gaussian_steady_state(0.5, 1.0, 1.0, 1.0);
  CHECK(g.C == doctest::Approx(8.0 / 7.0).epsilon(1e-12));
  CHECK(g.beta == doctest::Approx(std::sqrt(7.0 / 8.0)).epsilon(1e-12));
  CHECK(g.gamma == doctest::Approx(std::sqrt(8.0 / 7.0) / 2.0).epsilon(1e-12));

  // rho = 0 collapses the recursion
  CHECK(gaussian_steady_state(0.0, 2.5, 1.0, 1.0).C == doctest::Approx(2.5));

  CHECK_THROWS_AS(gaussian_steady_state(1.0, 1.0, 1.0, 1.0), ModelError);
  CHECK_THROWS_AS(gaussian_steady_state(0.5, -1.0, 1.0, 1.0), ModelError);
}

TEST_CASE("gaussian closed form equals recursion fixed point on random draws") {
  RngStream rng(31337);
  for (int t = 0; t < 1000; ++t) {
    const double rho = -0.95 + 1.9 * rng.uniform();
    const double sm2 = 0.1 + 3.0 * rng.uniform();
    const double sv2 = 0.1 + 3.0 * rng.uniform();
    const double power = 0.1 + 3.0 * rng.uniform();
    const GaussianModel g = gaussian_steady_state(rho, sm2, sv2, power);
    double cov = 0.0;  // iterate to the fixed point from scratch
    for (int i = 0; i < 4000; ++i)
      cov = rho * rho * sv2 / (power + sv2) * cov + sm2;
    CHECK(std::abs(cov - g.C) < 1e-10 * std::max(1.0, g.C));
  }
}

TEST_CASE("trapdoor counting source feeds the composition chain") {
  const TrapdoorModel t(0.5);
  const MarkovSource src = trapdoor_counting_source(t, 3);
  CHECK(src.initial(0) == doctest::Approx(0.5));
  CHECK(src.initial(1) == doctest::Approx(0.5));
  CHECK(src.kernel(0, 1) == doctest::Approx(0.5));
}

}  // TEST_SUITE
