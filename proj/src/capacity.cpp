#include "cclab/capacity.hpp"

#include <cmath>

#include "cclab/info.hpp"

namespace cclab {

namespace {

struct BaState {
  Vector input;          // current input distribution (always strictly positive)
  double mi;             // I at the current input
  double expected_cost;  // E[eta]
  double gap;            // tilted-objective duality gap reached
  int iterations;
};

// Blahut-Arimoto for the tilted objective I(r) - s * E_r[eta]; multiplicative
// updates keep the iterate strictly positive.  Best-effort: near a kink of
// the capacity-cost curve the gap stalls at O(|s - s*|), which the caller's
// final certificate absorbs, so no error is raised here.
BaState ba_fixed_multiplier(const CostedChannel& ch, double s, double inner_tol,
                            int max_iterations, const Vector* warm_start = nullptr) {
  const int nx = ch.kernel.input_size();
  const int ny = ch.kernel.output_size();
  const Matrix& k = ch.kernel.matrix();

  Vector r = warm_start != nullptr ? *warm_start : Vector::Constant(nx, 1.0 / nx);
  // keep a trace of mass everywhere so the support can re-grow
  r = (1.0 - 1e-6) * r + 1e-6 * Vector::Constant(nx, 1.0 / nx);
  r /= r.sum();
  Vector dkl(nx);
  int it = 0;
  double gap = std::numeric_limits<double>::infinity();
  double mi = 0.0;
  for (; it < max_iterations; ++it) {
    const Vector q = k.transpose() * r;  // output marginal
    for (int x = 0; x < nx; ++x) {
      double d = 0.0;
      for (int y = 0; y < ny; ++y)
        if (k(x, y) > 0.0) d += k(x, y) * std::log(k(x, y) / q(y));
      dkl(x) = d;
    }
    mi = r.dot(dkl);
    double ub = -std::numeric_limits<double>::infinity();
    for (int x = 0; x < nx; ++x) ub = std::max(ub, dkl(x) - s * ch.eta(x));
    gap = ub - (mi - s * r.dot(ch.eta));
    if (gap <= inner_tol) break;
    // multiplicative reweighting, stabilized by subtracting the max exponent
    Vector logw = dkl - s * ch.eta;
    const double mx = logw.maxCoeff();
    for (int x = 0; x < nx; ++x) r(x) *= std::exp(logw(x) - mx);
    r /= r.sum();
  }
  return BaState{r, mi, r.dot(ch.eta), gap, it};
}

// certified upper-bound gap for a candidate input: for every s >= 0,
//   C(budget) <= max_x [D(P_{Y|x}||q) - s eta(x)] + s budget,
// so report the bound minimized over s.  The bound is piecewise linear and
// convex in s; the minimum sits at s = 0 or where the argmax switches.
double duality_gap(const CostedChannel& ch, const FiniteDist& input, double mi) {
  const int nx = ch.kernel.input_size();
  const Vector q = ch.kernel.matrix().transpose() * input.vec();
  Vector dkl(nx);
  for (int x = 0; x < nx; ++x) {
    double d = 0.0;
    for (int y = 0; y < ch.kernel.output_size(); ++y)
      if (ch.kernel(x, y) > 0.0) d += ch.kernel(x, y) * std::log(ch.kernel(x, y) / q(y));
    dkl(x) = d;
  }
  const auto bound_at = [&](double s) {
    double ub = -std::numeric_limits<double>::infinity();
    for (int x = 0; x < nx; ++x) ub = std::max(ub, dkl(x) - s * ch.eta(x));
    return ub + s * ch.budget;
  };
  double best = bound_at(0.0);
  for (int i = 0; i < nx; ++i) {
    for (int j = i + 1; j < nx; ++j) {
      const double de = ch.eta(i) - ch.eta(j);
      if (de == 0.0) continue;
      const double s = (dkl(i) - dkl(j)) / de;
      if (s > 0.0 && std::isfinite(s)) best = std::min(best, bound_at(s));
    }
  }
  return best - mi;
}

CapacityResult capacity_cost_attempt(const CostedChannel& ch, double tol, int max_iterations,
                                     int inner_cap);

}  // namespace

CapacityResult capacity_cost(const CostedChannel& ch, double tol, int max_iterations) {
  if (ch.eta.minCoeff() > ch.budget)
    throw InfeasibleError("capacity_cost: budget below the cheapest input cost");
  // fast path with a modest per-multiplier budget, full budget on retry
  const int fast_cap = std::max(1000, max_iterations / 20);
  if (fast_cap < max_iterations) {
    try {
      return capacity_cost_attempt(ch, tol, max_iterations, fast_cap);
    } catch (const ConvergenceError&) {
    }
  }
  return capacity_cost_attempt(ch, tol, max_iterations, max_iterations);
}

namespace {

CapacityResult capacity_cost_attempt(const CostedChannel& ch, double tol, int max_iterations,
                                     int inner_cap) {
  const double inner_tol = 0.1 * tol;

  BaState free = ba_fixed_multiplier(ch, 0.0, inner_tol, max_iterations);
  int total_iter = free.iterations;
  if (free.expected_cost <= ch.budget + tol) {
    CapacityResult out{FiniteDist::normalized(free.input)};
    out.capacity = free.mi;
    out.expected_cost = free.expected_cost;
    out.lagrange_multiplier = 0.0;
    out.duality_gap = duality_gap(ch, out.optimal_input, out.capacity);
    out.iterations = total_iter;
    if (out.duality_gap > tol)
      throw ConvergenceError("capacity_cost: Blahut-Arimoto did not converge",
                             out.duality_gap);
    return out;
  }

  // bracket a multiplier whose solution satisfies the budget
  double s_lo = 0.0, s_hi = 1.0;
  BaState hi = ba_fixed_multiplier(ch, s_hi, inner_tol, inner_cap);
  total_iter += hi.iterations;
  int doublings = 0;
  while (hi.expected_cost > ch.budget && doublings++ < 80) {
    s_lo = s_hi;
    s_hi *= 2.0;
    hi = ba_fixed_multiplier(ch, s_hi, inner_tol, inner_cap);
    total_iter += hi.iterations;
  }
  if (hi.expected_cost > ch.budget)
    throw ConvergenceError("capacity_cost: could not bracket the cost multiplier",
                           hi.expected_cost - ch.budget);

  BaState lo = ba_fixed_multiplier(ch, s_lo, inner_tol, inner_cap);
  total_iter += lo.iterations;
  for (int b = 0; b < 200 && std::abs(lo.expected_cost - hi.expected_cost) > tol; ++b) {
    const double s_mid = 0.5 * (s_lo + s_hi);
    if (s_mid == s_lo || s_mid == s_hi) break;  // multiplier resolved to an ulp
    // warm-start from both bracket faces; near a kink the cold iteration
    // crawls while the warm ones stay on their faces
    BaState from_lo = ba_fixed_multiplier(ch, s_mid, inner_tol, inner_cap, &lo.input);
    BaState from_hi = ba_fixed_multiplier(ch, s_mid, inner_tol, inner_cap, &hi.input);
    total_iter += from_lo.iterations + from_hi.iterations;
    const double l_lo = from_lo.mi - s_mid * from_lo.expected_cost;
    const double l_hi = from_hi.mi - s_mid * from_hi.expected_cost;
    BaState mid = (l_lo >= l_hi) ? std::move(from_lo) : std::move(from_hi);
    if (mid.expected_cost > ch.budget) {
      s_lo = s_mid;
      lo = std::move(mid);
    } else {
      s_hi = s_mid;
      hi = std::move(mid);
    }
  }

  // mix the bracketing solutions to land on the budget exactly; the expected
  // cost is linear in the input and I is concave, so the mixture keeps the
  // shared Lagrangian value
  Vector input;
  if (lo.expected_cost > hi.expected_cost + 1e-300) {
    const double theta = std::clamp(
        (ch.budget - hi.expected_cost) / (lo.expected_cost - hi.expected_cost), 0.0, 1.0);
    input = theta * lo.input + (1.0 - theta) * hi.input;
  } else {
    input = hi.input;
  }
  input /= input.sum();

  CapacityResult out{FiniteDist::normalized(input)};
  out.capacity = mutual_information(ch.kernel, out.optimal_input);
  out.expected_cost = out.optimal_input.vec().dot(ch.eta);
  out.lagrange_multiplier = 0.5 * (s_lo + s_hi);
  out.duality_gap = duality_gap(ch, out.optimal_input, out.capacity);
  out.iterations = total_iter;
  if (out.duality_gap > tol)
    throw ConvergenceError("capacity_cost: duality gap above tolerance", out.duality_gap);
  return out;
}

}  // namespace

}  // namespace cclab
