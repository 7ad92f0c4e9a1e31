#pragma once

#include "cclab/dist.hpp"

namespace cclab {

// ---------------------------------------------------------------------------
// MarkovSource: time-homogeneous Markov process, initial law + square kernel.
// ---------------------------------------------------------------------------
struct MarkovSource {
  FiniteDist initial;
  StochKernel kernel;  // Q(w'|w), square over the source alphabet

  MarkovSource(FiniteDist init, StochKernel k)
      : initial(std::move(init)), kernel(std::move(k)) {
    if (kernel.input_size() != kernel.output_size())
      throw DimensionError("MarkovSource: kernel must be square");
    if (initial.size() != kernel.input_size())
      throw DimensionError("MarkovSource: initial law size != kernel size");
  }

  int alphabet_size() const { return kernel.input_size(); }
};

// ---------------------------------------------------------------------------
// Channel presets.
// ---------------------------------------------------------------------------

/// Binary symmetric channel: rows ((1-eps, eps), (eps, 1-eps)).
StochKernel bsc(double epsilon);

/// Z channel over `num_inputs` input symbols: P(1|0) = 0, P(1|x>0) = mu_delta.
/// This is the departure law of the sampled ./M/1 queue; input symbol = queue
/// occupancy.
StochKernel z_channel(double mu_delta, int num_inputs = 2);

/// Inverted-E (inverse erasure) channel over states {0,1,2}:
/// P(1|0) = 0, P(1|1) = 1/2, P(1|2) = 1.
StochKernel inverted_e_channel();

// ---------------------------------------------------------------------------
// Queue model (./M/1 timing channel sampled at bin width delta).
// ---------------------------------------------------------------------------
struct QueueModel {
  double lambda;  // arrival rate
  double mu;      // service rate
  double delta;   // bin width
  int truncation; // maximum queue length K kept in the finite-state analysis

  QueueModel(double lam, double m, double d, int K);

  double rho() const { return lambda / mu; }
  /// Geometric tail mass beyond the truncation point, (lambda/mu)^(K+1).
  double tail_mass() const;
};

/// Counting-function arrival source on alphabet {0..K}: increments with
/// probability lambda*delta (top state absorbing), initial occupancy
/// geometric (1-rho) rho^k truncated at K and renormalized.
MarkovSource queue_source(const QueueModel& q);

/// Exact stationary law of the sampled queue-length chain
/// X' = X + Bernoulli(lambda delta) - departure.  Differs from the geometric
/// law at O(delta) and converges to it as delta -> 0.
FiniteDist queue_chain_stationary(const QueueModel& q);

/// Initial occupancy W_0 (the state *before* the first arrival) that makes
/// the whole queue loop exactly stationary: the departure half-step of the
/// chain law, so X_1 = W_0 + arrival ~ queue_chain_stationary exactly.  The
/// exact Burke-property checks need this one.
FiniteDist queue_exact_stationary(const QueueModel& q);

/// Transition kernel of the sampled queue-length chain itself (arrival and
/// departure may share a bin).
StochKernel queue_length_chain(const QueueModel& q);

/// The idealized small-bin birth-death chain: up lambda
/// delta, down mu delta, no shared-bin events.  The geometric law satisfies
/// detailed balance for this chain exactly.
StochKernel queue_rate_chain(const QueueModel& q);

// ---------------------------------------------------------------------------
// Trapdoor (chemical) channel model.
// ---------------------------------------------------------------------------
struct TrapdoorModel {
  double p;  // probability that an input ball is labeled 0

  explicit TrapdoorModel(double p0) : p(p0) {
    if (!(p > 0.0 && p < 1.0)) throw ModelError("TrapdoorModel: need 0 < p < 1");
  }
};

struct TrapdoorLaws {
  FiniteDist input_law;      // law of one input ball label over {0,1}; P(0) = p
  FiniteDist initial_state;  // stationary law of the ball composition over {0,1,2}
  StochKernel transition;    // 3x3 chain of the composition X
};

/// The trapdoor composition chain: rows (p,1-p,0), (p/2,1/2,(1-p)/2),
/// (0,p,1-p); stationary law (p^2, 2p(1-p), (1-p)^2).
TrapdoorLaws trapdoor_source_and_init(const TrapdoorModel& t);

/// Counting-function source for the trapdoor loop: W_0 in {0,1} is the label
/// of the ball initially in the system (blue with probability 1-p), and
/// W_i = W_{i-1} + Bernoulli(1-p).  Alphabet sized for the given horizon.
MarkovSource trapdoor_counting_source(const TrapdoorModel& t, int horizon);

// ---------------------------------------------------------------------------
// Gauss-Markov source / AGN channel closed forms.
// ---------------------------------------------------------------------------
struct GaussianModel {
  double rho;       // source correlation, |rho| < 1
  double sigma_m2;  // innovation variance
  double sigma_v2;  // channel noise variance
  double power;     // input power budget
  // derived steady-state constants
  double C;      // stationary prediction-error covariance
  double beta;   // encoder gain sqrt(power / C)
  double gamma;  // decoder gain sqrt(power * C) / (power + sigma_v2)
  double w0_var; // initial source variance that makes the loop stationary
};

/// Computes C from the closed form sigma_m2 / (1 - rho^2 sigma_v2/(power+sigma_v2))
/// and cross-checks it against the covariance recursion fixed point to 1e-12.
GaussianModel gaussian_steady_state(double rho, double sigma_m2, double sigma_v2, double power);

}  // namespace cclab
