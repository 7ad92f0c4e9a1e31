#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>

#include "cclab/joint_law.hpp"

namespace cclab {

// ---------------------------------------------------------------------------
// CostSpec: the additive cost data (d, eta, alpha).  The decoder alphabet is
// an indexed finite set; when the decoder outputs beliefs, indices refer to
// grid points and the callback does the mapping.
// ---------------------------------------------------------------------------
struct CostSpec {
  std::function<ExtReal(int w, int z_prev, int z)> d;  // >= 0 not assumed; may be signed
  Vector eta;                                          // per channel input, >= 0
  double alpha = 0.0;
};

/// Mismatch cost 1{w != z} with eta = 0; the classical tracking objective.
CostSpec mismatch_cost(int input_alphabet_size, double alpha = 0.0);

/// All total maps source-alphabet -> channel-input-alphabet, lexicographic.
std::vector<EncoderMap> enumerate_encoder_maps(int src_size, int input_size,
                                               std::uint64_t cap = 1'000'000);

// ---------------------------------------------------------------------------
// BeliefGrid: regular lattice on the probability simplex with k/resolution
// coordinates.  Projection returns the Euclidean-nearest lattice point with a
// lowest-index tie-break.
// ---------------------------------------------------------------------------
class BeliefGrid {
 public:
  BeliefGrid(int dim, int resolution);

  int dim() const { return dim_; }
  int resolution() const { return res_; }
  int size() const { return static_cast<int>(points_.size()); }
  const Belief& point(int idx) const { return points_[idx]; }

  /// Index of the nearest grid point in Euclidean distance.
  int project(const Belief& b) const;

  /// Exact lookup of an on-grid belief (e.g. a vertex); -1 if off-grid.
  int find_exact(const Belief& b) const;

 private:
  int dim_;
  int res_;
  std::vector<Belief> points_;
  std::map<std::vector<int>, int> index_;  // lattice coordinates -> index
};

// ---------------------------------------------------------------------------
// Belief-state MDP pieces (state s = (z_prev, filtered belief), control
// u = (next-step encoder map, decoder output)).
// ---------------------------------------------------------------------------
struct BeliefState {
  int z_prev;
  Belief belief;
};

struct Control {
  int emap = -1;  // index into the enumerated encoder maps
  int z = -1;     // decoder output index
  bool valid() const { return emap >= 0 && z >= 0; }
};

struct ControlChoice {
  EncoderMap emap;
  int z;
};

/// Expected distortion dbar(s, z) = E_{w ~ s.belief} d(w, s.z_prev, z).
ExtReal bar_d(const BeliefState& s, int z, const CostSpec& spec);

/// Expected input cost etabar(s, emap) = E_{w ~ Phi(s.belief)} eta(emap(w)).
double bar_eta(const BeliefState& s, const EncoderMap& emap, const CostSpec& spec,
               const MarkovSource& source);

/// One-step law of the next belief state under control u: next z_prev = u.z,
/// next belief = F(b, y, emap) with the output-predictive probability of y.
/// Exactly coincident next beliefs are merged.
std::vector<std::pair<double, BeliefState>> mdp_transition(const BeliefState& s,
                                                           const ControlChoice& u,
                                                           const MarkovSource& source,
                                                           const StochKernel& channel);

/// Stage cost table: stage 0 pays alpha*etabar only, interior stages pay
/// dbar + alpha*etabar, the terminal stage pays dbar only.
ExtReal stage_cost(const BeliefState& s, const ControlChoice& u, const CostSpec& spec,
                   int stage, int horizon, const MarkovSource& source);

struct ValueTable {
  int stage = 0;
  // indexed by state = z_prev * grid_size + belief_index
  std::vector<ExtReal> value;
  std::vector<Control> argmin;
};

struct DpResult {
  std::vector<ValueTable> tables;  // stages 0..horizon
  double value;                    // E V_0(S_0) at the supplied initial state
  int initial_belief_idx;
};

/// Backward value recursion over the gridded belief MDP.  Post-transition
/// beliefs are projected to the nearest grid point; infinite-cost controls are
/// excluded whenever a finite alternative exists; ties break on the lowest
/// control index (emap-major, then z).  z0 pins the stage-0 decoder output.
/// The control set is the supplied encoder-map list crossed with the decoder
/// alphabet; the overload without a list uses every total map.
DpResult value_recursion(int horizon, const CostSpec& spec, const MarkovSource& source,
                         const StochKernel& channel, const BeliefGrid& grid, int z_size,
                         int z0, const Belief& initial_belief,
                         const std::vector<EncoderMap>& emaps);

DpResult value_recursion(int horizon, const CostSpec& spec, const MarkovSource& source,
                         const StochKernel& channel, const BeliefGrid& grid, int z_size,
                         int z0, const Belief& initial_belief);

// ---------------------------------------------------------------------------
// StructuralPolicy: executes the DP argmin tables as an implementable causal
// policy.  Both ends replay the same gridded filter from the observation
// history, so decoder outputs are grid/z indices and the encoder map at stage
// i+1 is a function of (w_{i+1}, s_i) only.
// ---------------------------------------------------------------------------
class StructuralPolicy final : public CausalPolicy {
 public:
  StructuralPolicy(const DpResult& dp, MarkovSource source, StochKernel channel,
                   BeliefGrid grid, std::vector<EncoderMap> emaps, int z_size, int z0,
                   const Belief& initial_belief);

  int encode(int stage, std::span<const int> w_hist, std::span<const int> y_hist) const override;
  int decode(int stage, std::span<const int> y_hist) const override;
  int decoder_alphabet_size() const override { return z_size_; }
  int initial_decoder_output() const override { return z0_; }

  /// Control chosen at DP stage k (0-based) in the given state.
  Control control_at(int stage, int z_prev, int belief_idx) const;

  const BeliefGrid& grid() const { return grid_; }

 private:
  struct ReplayState {
    int z_prev;
    int belief_idx;
  };
  /// Replays y_1..y_t through the gridded filter; returns s_t.
  ReplayState replay(std::span<const int> y_hist) const;

  std::vector<std::vector<Control>> controls_;  // [stage][state]
  MarkovSource source_;
  StochKernel channel_;
  BeliefGrid grid_;
  std::vector<EncoderMap> emaps_;
  int z_size_;
  int z0_;
  int b0_idx_;
};

/// Argmin tables packaged as a policy.
StructuralPolicy extract_structural_policy(const DpResult& dp, const MarkovSource& source,
                                           const StochKernel& channel, const BeliefGrid& grid,
                                           const std::vector<EncoderMap>& emaps, int z_size,
                                           int z0, const Belief& initial_belief);

/// Exact expected cost of any finite policy via full joint-law enumeration.
ExtReal evaluate_policy_exact(const CausalPolicy& policy, const CostSpec& spec,
                              const MarkovSource& source, const StochKernel& channel,
                              int horizon, std::uint64_t atom_cap = 10'000'000);

// ---------------------------------------------------------------------------
// Brute-force optimum over all history-dependent deterministic policies.
// Tiny instances only; the policy space explodes otherwise.
// ---------------------------------------------------------------------------
struct BruteForceResult {
  double value;
  std::shared_ptr<CausalPolicy> best_policy;
};

BruteForceResult brute_force_optimal(const CostSpec& spec, const MarkovSource& source,
                                     const StochKernel& channel, int horizon, int z_size,
                                     int z0);

}  // namespace cclab
