#include "doctest.h"

#include <cmath>

#include "cclab/dp.hpp"
#include "cclab/models.hpp"
#include "cclab/rng.hpp"

using namespace cclab;

namespace {

FiniteDist make2(double p) {
  Vector v(2);
  v << p, 1.0 - p;
  return FiniteDist(v);
}

MarkovSource repetition_source() {
  return MarkovSource{FiniteDist::uniform(2), StochKernel::identity(2)};
}

FiniteDist random_dist(RngStream& rng, int n) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = -std::log(rng.uniform_pos());
  return FiniteDist::normalized(v);
}

StochKernel random_kernel(RngStream& rng, int nin, int nout) {
  Matrix m(nin, nout);
  for (int r = 0; r < nin; ++r) {
    double s = 0.0;
    for (int c = 0; c < nout; ++c) {
      m(r, c) = -std::log(rng.uniform_pos());
      s += m(r, c);
    }
    m.row(r) /= s;
  }
  return StochKernel(std::move(m));
}

// simulate one rollout of a policy, returning the realized cost
double rollout_cost(const CausalPolicy& policy, const CostSpec& spec, const MarkovSource& source,
                    const StochKernel& channel, int n, RngStream& rng) {
  auto draw = [&rng](const Vector& p) {
    double u = rng.uniform();
    for (int i = 0; i < p.size(); ++i) {
      u -= p(i);
      if (u < 0.0) return i;
    }
    return static_cast<int>(p.size()) - 1;
  };
  std::vector<int> w, y;
  int prev_w = draw(source.initial.vec());
  int z_prev = policy.initial_decoder_output();
  double cost = 0.0;
  for (int i = 1; i <= n; ++i) {
    prev_w = draw(source.kernel.matrix().row(prev_w).transpose());
    w.push_back(prev_w);
    const int x = policy.encode(i, w, y);
    y.push_back(draw(channel.matrix().row(x).transpose()));
    const int z = policy.decode(i, y);
    cost += spec.d(w.back(), z_prev, z).value() + spec.alpha * spec.eta(x);
    z_prev = z;
  }
  return cost;
}

}  // namespace

TEST_SUITE("dp") {

TEST_CASE("enumerate_encoder_maps counting and order") {
  CHECK(enumerate_encoder_maps(2, 2).size() == 4);
  CHECK(enumerate_encoder_maps(1, 3).size() == 3);
  CHECK(enumerate_encoder_maps(3, 2).size() == 8);
  // lexicographic: first map is all-zero, last is all-max
  const auto maps = enumerate_encoder_maps(2, 2);
  CHECK(maps.front()(0) == 0);
  CHECK(maps.front()(1) == 0);
  CHECK(maps.back()(0) == 1);
  CHECK(maps.back()(1) == 1);
  CHECK_THROWS_AS(enumerate_encoder_maps(30, 10), EnumerationLimitError);
}

TEST_CASE("bar_d") {
  const BeliefState s{0, make2(0.7)};
  CostSpec zero;
  zero.d = [](int, int, int) { return ExtReal(0.0); };
  zero.eta = Vector::Zero(2);
  CHECK(bar_d(s, 0, zero).value() == 0.0);

  const CostSpec mm = mismatch_cost(2);
  CHECK(bar_d(s, 0, mm).value() == doctest::Approx(0.3));
  CHECK(bar_d(s, 1, mm).value() == doctest::Approx(0.7));

  CostSpec inf_spec;
  inf_spec.d = [](int w, int, int) { return w == 0 ? ExtReal::infinity() : ExtReal(0.0); };
  inf_spec.eta = Vector::Zero(2);
  CHECK(bar_d(s, 0, inf_spec).is_inf());
  // unsupported atom does not poison the expectation
  CHECK(!bar_d(BeliefState{0, make2(0.0)}, 0, inf_spec).is_inf());
}

TEST_CASE("bar_eta") {
  const MarkovSource src = repetition_source();
  CostSpec spec;
  spec.d = [](int, int, int) { return ExtReal(0.0); };
  spec.eta = Vector::Zero(2);
  const BeliefState s{0, make2(0.6)};
  CHECK(bar_eta(s, EncoderMap::identity(2), spec, src) == 0.0);

  spec.eta = Vector(2);
  spec.eta << 0.0, 1.0;
  // constant-1 encoder always pays
  CHECK(bar_eta(s, EncoderMap({1, 1}, 2), spec, src) == doctest::Approx(1.0));
  // identity encoder pays the predicted mass of symbol 1 = 0.4
  CHECK(bar_eta(s, EncoderMap::identity(2), spec, src) == doctest::Approx(0.4));
}

TEST_CASE("mdp_transition") {
  const MarkovSource src = repetition_source();

  // noiseless channel, injective map, point-mass belief: deterministic move
  auto det = mdp_transition(BeliefState{0, make2(1.0)},
                            ControlChoice{EncoderMap::identity(2), 1},
                            src, StochKernel::identity(2));
  REQUIRE(det.size() == 1);
  CHECK(det[0].first == doctest::Approx(1.0));
  CHECK(det[0].second.z_prev == 1);
  CHECK(det[0].second.belief(0) == doctest::Approx(1.0));

  // uninformative channel: single merged atom at the prediction
  Matrix flat(2, 2);
  flat << 0.5, 0.5, 0.5, 0.5;
  auto un = mdp_transition(BeliefState{0, make2(0.3)},
                           ControlChoice{EncoderMap::identity(2), 0},
                           src, StochKernel(flat));
  REQUIRE(un.size() == 1);
  CHECK(un[0].first == doctest::Approx(1.0));
  CHECK(un[0].second.belief(0) == doctest::Approx(0.3));

  // mixture consistency: sum_y prob * next_belief = Phi(b)
  auto mix = mdp_transition(BeliefState{0, make2(0.3)},
                            ControlChoice{EncoderMap::identity(2), 0},
                            src, bsc(0.2));
  Vector blend = Vector::Zero(2);
  double total = 0.0;
  for (const auto& [p, st] : mix) {
    blend += p * st.belief.vec();
    total += p;
  }
  CHECK(total == doctest::Approx(1.0));
  CHECK(blend(0) == doctest::Approx(0.3));
}

TEST_CASE("stage_cost boundaries") {
  const MarkovSource src = repetition_source();
  const BeliefState s{0, make2(0.7)};
  CostSpec spec = mismatch_cost(2, 2.0);
  spec.eta = Vector(2);
  spec.eta << 0.0, 1.0;
  const ControlChoice u{EncoderMap::identity(2), 1};

  // stage 0 pays only the input cost
  CHECK(stage_cost(s, u, spec, 0, 3, src).value() == doctest::Approx(2.0 * 0.3));
  // interior pays both
  CHECK(stage_cost(s, u, spec, 1, 3, src).value() == doctest::Approx(0.7 + 2.0 * 0.3));
  // terminal ignores the encoder entirely
  CHECK(stage_cost(s, u, spec, 3, 3, src).value() == doctest::Approx(0.7));
  CHECK_THROWS_AS(stage_cost(s, u, spec, 4, 3, src), PreconditionError);
}

TEST_CASE("value_recursion: horizon 0 reduces to pointwise bar_d minimization") {
  const MarkovSource src = repetition_source();
  const BeliefGrid grid(2, 10);
  const CostSpec spec = mismatch_cost(2);
  const DpResult dp = value_recursion(0, spec, src, bsc(0.1), grid, 2, 0, FiniteDist::uniform(2));
  for (int g = 0; g < grid.size(); ++g) {
    const BeliefState s{0, grid.point(g)};
    const double expect =
        std::min(bar_d(s, 0, spec).value(), bar_d(s, 1, spec).value());
    CHECK(dp.tables[0].value[g].value() == doctest::Approx(expect));
  }
}

TEST_CASE("value_recursion: noiseless channel tracks perfectly from point masses") {
  const MarkovSource src = repetition_source();
  const BeliefGrid grid(2, 20);
  const CostSpec spec = mismatch_cost(2);
  for (int n : {1, 2, 3}) {
    const DpResult dp =
        value_recursion(n, spec, src, StochKernel::identity(2), grid, 2, 0, make2(1.0));
    const int vertex = grid.find_exact(make2(1.0));
    REQUIRE(vertex >= 0);
    CHECK(dp.tables[0].value[vertex].value() == doctest::Approx(0.0));
    // uniform start is also perfect: the first observation reveals the symbol,
    // which is then tracked exactly
    CHECK(dp.value == doctest::Approx(0.0));
  }
}

TEST_CASE("brute_force_optimal: trivial instances") {
  const MarkovSource src = repetition_source();
  CostSpec zero;
  zero.d = [](int, int, int) { return ExtReal(0.0); };
  zero.eta = Vector::Zero(2);
  CHECK(brute_force_optimal(zero, src, bsc(0.1), 1, 2, 0).value == doctest::Approx(0.0));

  // noiseless, mismatch: decode the received bit
  CHECK(brute_force_optimal(mismatch_cost(2), src, StochKernel::identity(2), 1, 2, 0).value ==
        doctest::Approx(0.0));

  // BSC(0.1), n=1: best achievable error probability is epsilon
  CHECK(brute_force_optimal(mismatch_cost(2), src, bsc(0.1), 1, 2, 0).value ==
        doctest::Approx(0.1));

  CHECK_THROWS_AS(brute_force_optimal(mismatch_cost(2), src, bsc(0.1), 3, 2, 0),
                  EnumerationLimitError);
}

TEST_CASE("oracle dominance on the binary n=2 family") {
  const MarkovSource src = repetition_source();
  const CostSpec spec = mismatch_cost(2);
  const BeliefGrid grid(2, 200);
  for (double eps : {0.05, 0.1, 0.2}) {
    const StochKernel chan = bsc(eps);
    const BruteForceResult oracle = brute_force_optimal(spec, src, chan, 2, 2, 0);
    const DpResult dp = value_recursion(2, spec, src, chan, grid, 2, 0, FiniteDist::uniform(2));
    // the projected-MDP fixed point may sit slightly on either side of the
    // optimum (measured overshoot ~2e-3 at this resolution); the two-sided
    // 0.02 bound is the guaranteed statement about it
    CHECK(std::abs(dp.value - oracle.value) <= 0.02);

    const StructuralPolicy pol = extract_structural_policy(
        dp, src, chan, grid, enumerate_encoder_maps(2, 2), 2, 0, FiniteDist::uniform(2));
    const double exec = evaluate_policy_exact(pol, spec, src, chan, 2).value();
    CHECK(exec >= oracle.value - 1e-9);  // a real policy can never beat the global optimum
    CHECK(exec <= oracle.value + 0.02);
    CHECK(std::abs(exec - dp.value) <= 0.02);  // execution reproduces the DP value on-grid
  }
}

TEST_CASE("evaluate_policy_exact agrees with Monte Carlo within 3 sigma") {
  RngStream rng(1234);
  const MarkovSource src = repetition_source();
  const StochKernel chan = bsc(0.15);
  const CostSpec spec = mismatch_cost(2);
  const BeliefGrid grid(2, 50);
  const DpResult dp = value_recursion(2, spec, src, chan, grid, 2, 0, FiniteDist::uniform(2));
  const StructuralPolicy pol = extract_structural_policy(
      dp, src, chan, grid, enumerate_encoder_maps(2, 2), 2, 0, FiniteDist::uniform(2));

  const double exact = evaluate_policy_exact(pol, spec, src, chan, 2).value();
  const int trials = 100000;
  double sum = 0.0, sum2 = 0.0;
  for (int t = 0; t < trials; ++t) {
    const double c = rollout_cost(pol, spec, src, chan, 2, rng);
    sum += c;
    sum2 += c * c;
  }
  const double mean = sum / trials;
  const double sd = std::sqrt((sum2 / trials - mean * mean) / trials);
  CHECK(std::abs(mean - exact) < 3.0 * sd + 1e-12);
}

TEST_CASE("value tables are bit-for-bit deterministic") {
  const MarkovSource src = repetition_source();
  const CostSpec spec = mismatch_cost(2);
  const BeliefGrid grid(2, 100);
  const DpResult a = value_recursion(2, spec, src, bsc(0.1), grid, 2, 0, FiniteDist::uniform(2));
  const DpResult b = value_recursion(2, spec, src, bsc(0.1), grid, 2, 0, FiniteDist::uniform(2));
  REQUIRE(a.tables.size() == b.tables.size());
  for (size_t k = 0; k < a.tables.size(); ++k) {
    for (size_t s = 0; s < a.tables[k].value.size(); ++s) {
      CHECK(a.tables[k].value[s] == b.tables[k].value[s]);
      CHECK(a.tables[k].argmin[s].emap == b.tables[k].argmin[s].emap);
      CHECK(a.tables[k].argmin[s].z == b.tables[k].argmin[s].z);
    }
  }
}

TEST_CASE("states with no finite control carry infinity, no exception") {
  const MarkovSource src = repetition_source();
  CostSpec spec;
  spec.d = [](int, int, int) { return ExtReal::infinity(); };
  spec.eta = Vector::Zero(2);
  const BeliefGrid grid(2, 10);
  const DpResult dp = value_recursion(1, spec, src, bsc(0.1), grid, 2, 0, src.initial);
  for (const auto& v : dp.tables[1].value) CHECK(v.is_inf());
  for (const auto& c : dp.tables[1].argmin) CHECK(!c.valid());
  // the terminal infinity poisons stage 0 through the continuation
  for (const auto& v : dp.tables[0].value) CHECK(v.is_inf());
}

TEST_CASE("grid projection is the exact Euclidean nearest neighbor") {
  RngStream rng(2025);
  for (int trial = 0; trial < 300; ++trial) {
    const int dim = 2 + rng.uniform_int(3);
    const int res = 1 + rng.uniform_int(7);
    const BeliefGrid grid(dim, res);
    const FiniteDist b = random_dist(rng, dim);
    const int got = grid.project(b);
    double best = std::numeric_limits<double>::infinity();
    for (int g = 0; g < grid.size(); ++g)
      best = std::min(best, (grid.point(g).vec() - b.vec()).squaredNorm());
    const double got_dist = (grid.point(got).vec() - b.vec()).squaredNorm();
    CHECK(got_dist == doctest::Approx(best).epsilon(1e-12));
  }
  // vertices are on every grid
  const BeliefGrid g3(3, 4);
  CHECK(g3.find_exact(FiniteDist::point_mass(3, 0)) >= 0);
  CHECK(g3.find_exact(FiniteDist::point_mass(3, 2)) >= 0);
}

TEST_CASE("DP value converges toward the fine-grid limit as resolution doubles") {
  // adjacent-resolution values are not literally monotone (the projected-MDP
  // fixed point wanders on both sides of the limit), so convergence is tested
  // band-to-band against a fine reference
  RngStream rng(909);
  for (int instance = 0; instance < 10; ++instance) {
    const MarkovSource src{random_dist(rng, 2), random_kernel(rng, 2, 2)};
    const StochKernel chan = random_kernel(rng, 2, 2);
    const CostSpec spec = mismatch_cost(2);
    auto value_at = [&](int res) {
      const BeliefGrid grid(2, res);
      return value_recursion(2, spec, src, chan, grid, 2, 0, src.initial).value;
    };
    const double ref = value_at(800);
    const double coarse = std::max(std::abs(value_at(25) - ref), std::abs(value_at(50) - ref));
    const double fine = std::max(std::abs(value_at(200) - ref), std::abs(value_at(400) - ref));
    CHECK(fine <= coarse + 1e-9);
  }
}

}  // TEST_SUITE
