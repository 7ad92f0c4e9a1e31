#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "cclab/filtering.hpp"

namespace cclab {

// ---------------------------------------------------------------------------
// CausalPolicy: the general deterministic encoder/decoder pair of the causal
// coding problem.  Stage indices are 1-based; histories are passed as spans
// so implementations can be stateless.
// ---------------------------------------------------------------------------
class CausalPolicy {
 public:
  virtual ~CausalPolicy() = default;

  /// Channel input x_i = e_i(w_1..w_i, y_1..y_{i-1}).
  virtual int encode(int stage, std::span<const int> w_hist,
                     std::span<const int> y_hist) const = 0;

  /// Decoder output z_i = d_i(y_1..y_i).
  virtual int decode(int stage, std::span<const int> y_hist) const = 0;

  virtual int decoder_alphabet_size() const = 0;

  /// z_0, known to encoder and decoder before the first observation.
  virtual int initial_decoder_output() const = 0;
};

// ---------------------------------------------------------------------------
// JointLaw: the exact finite-horizon law of (W_0, W^n, X^n, Y^n, Z^n) under a
// policy.  Atoms are stored flat; trajectories with probability zero are
// never materialized.
// ---------------------------------------------------------------------------
class JointLaw {
 public:
  JointLaw(int horizon, int z0) : n_(horizon), z0_(z0) {
    if (horizon < 1) throw PreconditionError("JointLaw: horizon must be >= 1");
  }

  int horizon() const { return n_; }
  int z0() const { return z0_; }
  std::size_t num_atoms() const { return probs_.size(); }
  double prob(std::size_t a) const { return probs_[a]; }

  int w0(std::size_t a) const { return data_[a * stride()]; }
  int w(std::size_t a, int i) const { return field(a, 0, i); }
  int x(std::size_t a, int i) const { return field(a, 1, i); }
  int y(std::size_t a, int i) const { return field(a, 2, i); }
  /// z(a, 0) is the initial decoder output.
  int z(std::size_t a, int i) const { return i == 0 ? z0_ : field(a, 3, i); }

  double total_probability() const {
    double s = 0.0;
    for (double p : probs_) s += p;
    return s;
  }

  void add_atom(int w0, std::span<const int> w, std::span<const int> x,
                std::span<const int> y, std::span<const int> z, double p);

  /// Validates total mass within 1e-10.
  void finalize() const;

 private:
  std::size_t stride() const { return 1 + 4 * static_cast<std::size_t>(n_); }
  int field(std::size_t a, int block, int i) const {
    return data_[a * stride() + 1 + static_cast<std::size_t>(block) * n_ + (i - 1)];
  }

  int n_;
  int z0_;
  std::vector<int> data_;
  std::vector<double> probs_;
};

/// Exact joint law induced by a policy over the given horizon.  Enumeration is
/// sparse (zero-probability branches are pruned) and guarded by `atom_cap`.
JointLaw enumerate_joint_law(const MarkovSource& source, const StochKernel& channel,
                             const CausalPolicy& policy, int horizon,
                             std::uint64_t atom_cap = 10'000'000);

// ---------------------------------------------------------------------------
// Information functionals of a joint law.  Projections map an atom index to a
// grouping key; keys are small int vectors.
// ---------------------------------------------------------------------------
using AtomKey = std::vector<int>;
using AtomProjection = std::function<AtomKey(const JointLaw&, std::size_t)>;

/// I(A;B) for the groupings induced by two projections, in nats.
double law_mutual_information(const JointLaw& law, const AtomProjection& a,
                              const AtomProjection& b);

/// I(A;B|C), in nats.
double law_conditional_mi(const JointLaw& law, const AtomProjection& a,
                          const AtomProjection& b, const AtomProjection& c);

/// Projections for the four processes over index ranges [lo, hi] (1-based).
AtomProjection proj_w(int lo, int hi);
AtomProjection proj_x(int lo, int hi);
AtomProjection proj_y(int lo, int hi);
AtomProjection proj_z(int lo, int hi);
AtomProjection proj_empty();

struct MiDecomposition {
  double mi_direct;            // I(W^n; Y^n)
  double mi_chain_rule;        // sum_i I(W^n; Y_i | Y^{i-1})
  double mi_sequential_gains;  // sum_i E[log B_{i|i}(W_i)/B_{i|i-1}(W_i)]
};

/// The three routes to the mutual information between source path and channel
/// outputs.  Direct and chain-rule values agree identically; the sequential
/// information gains agree with both exactly when the encoder operates on the
/// sufficient statistic (w_i, y-history).
MiDecomposition mi_decompositions(const JointLaw& law);

/// Expected value of a per-stage cost sum_{i=1..n} g(w_i, z_{i-1}, z_i, x_i).
ExtReal law_expected_cost(const JointLaw& law,
                          const std::function<ExtReal(int w, int zprev, int z, int x)>& g);

}  // namespace cclab
