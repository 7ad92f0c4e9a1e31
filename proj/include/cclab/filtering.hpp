#pragma once

#include <cstdint>
#include <vector>

#include "cclab/models.hpp"

namespace cclab {

// ---------------------------------------------------------------------------
// EncoderMap: the per-step map from the current source symbol to the channel
// input.  A total function on the source alphabet.
// ---------------------------------------------------------------------------
class EncoderMap {
 public:
  EncoderMap(std::vector<int> table, int input_alphabet)
      : table_(std::move(table)), input_size_(input_alphabet) {
    if (table_.empty()) throw DimensionError("EncoderMap: empty table");
    for (int x : table_)
      if (x < 0 || x >= input_size_)
        throw DimensionError("EncoderMap: entry outside the channel input alphabet");
  }

  static EncoderMap identity(int n) {
    std::vector<int> t(n);
    for (int i = 0; i < n; ++i) t[i] = i;
    return EncoderMap(std::move(t), n);
  }

  int operator()(int w) const { return table_.at(w); }
  int source_size() const { return static_cast<int>(table_.size()); }
  int input_size() const { return input_size_; }
  const std::vector<int>& table() const { return table_; }

 private:
  std::vector<int> table_;
  int input_size_;
};

/// One-step prediction update Phi(b)(w) = sum_{w'} Q(w|w') b(w').
Belief ospu(const Belief& b, const MarkovSource& source);

/// Output predictive distribution Qtilde(y | b, emap) = sum_w P(y|emap(w)) Phi(b)(w),
/// the normalizing constant of the nonlinear filter.
FiniteDist output_predictive(const Belief& b, const EncoderMap& emap,
                             const StochKernel& channel, const MarkovSource& source);

/// Nonlinear filter F(b, y, emap)(w) = P(y|emap(w)) Phi(b)(w) / Qtilde(y).
/// Throws ImpossibleObservationError when Qtilde(y) = 0; a zero-probability
/// observation is never silently renormalized.
Belief nlf(const Belief& b, int y, const EncoderMap& emap, const StochKernel& channel,
           const MarkovSource& source);

struct BeliefPair {
  Belief predicted;  // B_{i|i-1}
  Belief filtered;   // B_{i|i}
};

/// Runs the filter along an observation sequence: predicted_i = Phi(filtered_{i-1}),
/// filtered_i = F(filtered_{i-1}, y_i, emap_i), starting from `initial` = B_{0|0}.
std::vector<BeliefPair> belief_trajectory(const std::vector<int>& y_seq,
                                          const std::vector<EncoderMap>& emap_seq,
                                          const MarkovSource& source,
                                          const StochKernel& channel, const Belief& initial);

/// Ground-truth posterior P(W_i | Y^j = y_seq[0..j-1]) computed by summing the
/// full joint law over all source trajectories.  Oracle for the recursive
/// filter; requires i >= j and feasible enumeration (guarded).
Belief brute_force_posterior(const std::vector<int>& y_seq,
                             const std::vector<EncoderMap>& emap_seq,
                             const MarkovSource& source, const StochKernel& channel, int j,
                             int i, std::uint64_t atom_cap = 10'000'000);

}  // namespace cclab
