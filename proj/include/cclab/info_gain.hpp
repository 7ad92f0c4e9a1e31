#pragma once

#include "cclab/dp.hpp"

namespace cclab {

/// Per-step sequential-information-gain distortion at source symbol w:
/// -log( z(w) / Phi(z_prev)(w) ) when z << Phi(z_prev), the +inf sentinel
/// otherwise.  Negative values are rewards; this cost is signed by design.
ExtReal info_gain_distortion(int w, const Belief& z_prev, const Belief& z,
                             const MarkovSource& source);

/// State-space form of the expected gain cost (expectation of the per-step
/// distortion under the current belief b):
///   D(b || z) - D(b || Phi(z_prev))   when b << z << Phi(z_prev), else +inf.
/// Minimized over z exactly at z = b.
ExtReal bar_d_infogain(const Belief& b, const Belief& z_prev, const Belief& z,
                       const MarkovSource& source);

/// CostSpec whose decoder alphabet is the belief grid and whose distortion is
/// the information-gain log-ratio; Phi of every grid point and the pairwise
/// absolute-continuity table are precomputed.
CostSpec make_infogain_cost(const MarkovSource& source, const BeliefGrid& grid, double alpha,
                            Vector eta);

enum class EncoderClass {
  general,         // e_i(w^i, y^{i-1}), full history tables; explodes fast
  per_y_history,   // a source-symbol map per output history node
};

struct EncoderSearchResult {
  double best_objective;    // min over encoders of  -I(W^n;Y^n) + alpha sum E[eta(X_i)]
  double best_mi;           // I at the minimizer
  std::uint64_t encoders_tried;
};

/// Exhaustive encoder search for the posterior-decoder cost identity.  The
/// per-y-history class is exhaustive over maps attached to output-history
/// nodes (the form structural optimality guarantees is enough); the general
/// class enumerates unrestricted causal encoders and is feasible only for
/// very small instances.
EncoderSearchResult min_encoder_objective(const MarkovSource& source, const StochKernel& channel,
                                          double alpha, const Vector& eta, int horizon,
                                          EncoderClass encoder_class);

struct PosteriorDecoderReport {
  double dp_value = 0.0;
  double encoder_search_objective = 0.0;
  double gap = 0.0;
  double grid_tolerance = 0.0;       // slack for the cost identity, 2*horizon/resolution
  double posterior_tolerance = 0.0;  // per-state slack for (i)/(ii), 4/resolution
  double worst_posterior_gap = 0.0;  // measured max of Q(z=posterior) - Q(chosen)
  bool decoder_is_posterior = true;        // posterior attains the minimum at reachable states
  bool encoder_zprev_independent = true;   // one emap optimal across z_prev rows per belief
  bool optimal_cost_matches = true;        // |dp_value - search| <= 1e-6 + grid tolerance
  int reachable_states = 0;
  bool pass() const {
    return decoder_is_posterior && encoder_zprev_independent && optimal_cost_matches;
  }
};

/// Runs the belief-decoder DP under the information-gain cost and checks the
/// three posterior-decoder optimality claims.  Grid slack is pinned at
/// 2 * horizon / resolution.
PosteriorDecoderReport verify_posterior_decoder(
    const MarkovSource& source, const StochKernel& channel, double alpha, const Vector& eta,
    int horizon, int grid_resolution,
    EncoderClass encoder_class = EncoderClass::per_y_history);

struct HmmReport {
  double filter_policy_cost = 0.0;  // identity encoder + exact-filter decoder under the gain cost
  double minus_mi = 0.0;            // -I(W^n;Y^n) by joint-law enumeration
  double dp_executed_cost = 0.0;    // best grid decoder, executed exactly
  bool cost_equals_minus_mi = false;
  bool filter_not_beaten = false;
  bool pass() const { return cost_equals_minus_mi && filter_not_beaten; }
};

/// The identity-encoder special case: the exact-filter decoder attains
/// -I(W^n;Y^n), and no grid decoder improves on it.
HmmReport hmm_mode(const MarkovSource& source, const StochKernel& channel, int horizon,
                   int grid_resolution = 100);

}  // namespace cclab
