#pragma once

#include "cclab/dist.hpp"

namespace cclab {

/// Kullback-Leibler divergence D(p || q) in nats, with 0*log(0/.) = 0.
/// Returns the +inf sentinel when absolute continuity fails (some symbol with
/// q = 0 < p).
ExtReal kl_divergence(const FiniteDist& p, const FiniteDist& q);

/// Conditional divergence D(p_{V|U} || q_{V|U} | p_U) = sum_u p_U(u) D(row_u || row_u').
ExtReal conditional_kl(const StochKernel& p, const StochKernel& q, const FiniteDist& pu);

/// Mutual information I(U;V) in nats for V|U ~ kernel, U ~ input.
/// Always finite on finite alphabets.
double mutual_information(const StochKernel& kernel, const FiniteDist& input);

/// Shannon entropy in nats.
double entropy(const FiniteDist& p);

}  // namespace cclab
