#pragma once

#include "cclab/dist.hpp"

namespace cclab {

struct CapacityResult {
  double capacity = 0.0;  // nats
  FiniteDist optimal_input;
  double expected_cost = 0.0;        // E[eta(X)] at the returned input
  double lagrange_multiplier = 0.0;  // 0 when the budget is inactive
  double duality_gap = 0.0;          // certified bound on suboptimality
  int iterations = 0;

  explicit CapacityResult(FiniteDist input) : optimal_input(std::move(input)) {}
};

/// Capacity-cost function C(budget) = max I(P_X; channel) s.t. E[eta(X)] <= budget,
/// by Blahut-Arimoto alternating maximization with a bisection sweep over the
/// cost multiplier.  The unconstrained optimum short-circuits the sweep when it
/// already satisfies the budget.  The result is certified by the standard
/// duality-gap bound; `tol` bounds both the constraint violation and the gap.
CapacityResult capacity_cost(const CostedChannel& channel, double tol = 1e-9,
                             int max_iterations = 100000);

}  // namespace cclab
