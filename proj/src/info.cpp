#include "cclab/info.hpp"

namespace cclab {

ExtReal kl_divergence(const FiniteDist& p, const FiniteDist& q) {
  if (p.size() != q.size())
    throw DimensionError("kl_divergence: alphabet sizes differ");
  double s = 0.0;
  for (int v = 0; v < p.size(); ++v) {
    if (p(v) == 0.0) continue;
    if (q(v) == 0.0) return ExtReal::infinity();
    s += p(v) * std::log(p(v) / q(v));
  }
  // non-negative by Gibbs; rounding can leave a -1e-17 residue
  return ExtReal(std::max(s, 0.0));
}

ExtReal conditional_kl(const StochKernel& p, const StochKernel& q, const FiniteDist& pu) {
  if (p.input_size() != q.input_size() || p.output_size() != q.output_size())
    throw DimensionError("conditional_kl: kernel dimensions differ");
  if (pu.size() != p.input_size())
    throw DimensionError("conditional_kl: mixing distribution size mismatch");
  ExtReal s(0.0);
  for (int u = 0; u < pu.size(); ++u) {
    if (pu(u) == 0.0) continue;
    s += pu(u) * kl_divergence(p.row(u), q.row(u));
    if (s.is_inf()) return s;
  }
  return s;
}

double mutual_information(const StochKernel& kernel, const FiniteDist& input) {
  if (input.size() != kernel.input_size())
    throw DimensionError("mutual_information: input size mismatch");
  const FiniteDist marginal = kernel.push(input);
  double s = 0.0;
  for (int u = 0; u < input.size(); ++u) {
    if (input(u) == 0.0) continue;
    for (int y = 0; y < kernel.output_size(); ++y) {
      const double pyu = kernel(u, y);
      if (pyu == 0.0) continue;
      // marginal(y) >= input(u) * pyu > 0 here, so the log is finite
      s += input(u) * pyu * std::log(pyu / marginal(y));
    }
  }
  return std::max(s, 0.0);
}

double entropy(const FiniteDist& p) {
  double h = 0.0;
  for (int v = 0; v < p.size(); ++v)
    if (p(v) > 0.0) h -= p(v) * std::log(p(v));
  return h;
}

}  // namespace cclab
