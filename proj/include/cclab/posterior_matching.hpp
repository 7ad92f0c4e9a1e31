#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "cclab/dist.hpp"
#include "cclab/stats.hpp"

namespace cclab {

// ---------------------------------------------------------------------------
// PiecewisePosterior: exact piecewise-constant density on [0,1], the message
// posterior of the feedback scheme.  Breakpoints are strictly increasing from
// 0 to 1; adjacent pieces with equal densities (within 1e-14 relative) merge
// and breakpoints closer than 1e-15 collapse, so the representation cannot
// fragment without bound.
// ---------------------------------------------------------------------------
class PiecewisePosterior {
 public:
  PiecewisePosterior(std::vector<double> breakpoints, std::vector<double> densities);

  static PiecewisePosterior uniform();

  int piece_count() const { return static_cast<int>(dens_.size()); }
  const std::vector<double>& breakpoints() const { return breaks_; }
  const std::vector<double>& densities() const { return dens_; }

  double cdf(double w) const;
  /// Mass of [a, b].
  double mass(double a, double b) const;
  /// Smallest m with CDF(m) = 1/2.
  double median() const;
  double total_mass() const;

 private:
  std::vector<double> breaks_;  // size pieces+1, breaks_[0]=0, breaks_.back()=1
  std::vector<double> dens_;
};

/// Posterior-matching encoder step: evaluates the posterior CDF at the message
/// point and applies the channel-specific inverse-CDF shaping.
double pm_encoder_step(double w, const PiecewisePosterior& posterior,
                       const std::function<double(double)>& input_cdf_inverse);

/// The BSC median rule: input 1 iff w >= median (ties encode as 1).
int pm_bsc_input(double w, const PiecewisePosterior& posterior);

/// Bayes update of the message posterior for the BSC median scheme: split at
/// the current median, scale the side consistent with y by 2(1-eps) and the
/// other by 2 eps, renormalize exactly.
PiecewisePosterior bsc_posterior_update(const PiecewisePosterior& posterior, int y,
                                        double epsilon);

// ---------------------------------------------------------------------------
// Seeded runs and statistical checks.
// ---------------------------------------------------------------------------
struct PMRun {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  int horizon = 0;
  double epsilon = 0.0;
  double w = 0.0;                        // the message point
  std::vector<int> x, y;                 // channel inputs/outputs, length horizon
  std::vector<double> median_before;     // median of the prior to step i
  std::vector<double> cdf_at_w_before;   // F_{W|Y^{i-1}}(W) before step i
  std::vector<PiecewisePosterior> post;  // posterior after step i
};

PMRun pm_bsc_run(double epsilon, int horizon, std::uint64_t seed, std::uint64_t stream = 0);

/// Per-step posterior mass of the length-2^{-iR} uniform-quantizer cell that
/// contains the true message point; rate in bits per channel use.
std::vector<double> achievability_mass(const PMRun& run, double rate_bits);

struct PMInvarianceChecks {
  struct Checkpoint {
    int i = 0;
    double ks_uniform_p = 0.0;   // F_{W|Y^{i-1}}(W) ~ Uniform[0,1]
    double chi2_input_p = 0.0;   // X_i ~ capacity-achieving input (Bernoulli 1/2)
    double chi2_indep_p = 0.0;   // (Y_{i-1}, Y_i) independent
  };
  std::vector<Checkpoint> checkpoints;
  int trials = 0;

  bool pass(double level = 0.01) const {
    for (const auto& c : checkpoints)
      if (c.ks_uniform_p <= level || c.chi2_input_p <= level || c.chi2_indep_p <= level)
        return false;
    return true;
  }
};

/// Monte Carlo invariance checks of the PM-BSC scheme at the given step
/// indices (statistical failures are reported as p-values, never thrown).
/// `median_override` substitutes a fixed threshold for the running median,
/// which breaks the scheme on purpose (regression guard).
PMInvarianceChecks pm_invariance_checks(double epsilon, int horizon, int trials,
                                        std::uint64_t seed,
                                        const std::vector<int>& checkpoints = {2, 5, 10},
                                        double median_override = -1.0);

// ---------------------------------------------------------------------------
// Message-grid PM for the additive Gaussian channel.  The posterior is a
// FiniteDist over uniform cells of [0,1]; the shaping map is the Gaussian
// input quantile sqrt(power) * Phi^{-1}(u).
// ---------------------------------------------------------------------------
struct GridPMStep {
  double x = 0.0;       // channel input for the true message cell
  FiniteDist posterior; // updated grid posterior
};

/// One AGN PM step on the grid: encode the cell holding the message point via
/// the mid-cell CDF, observe y = x + noise, Bayes-update every cell.
GridPMStep agn_pm_grid_step(const FiniteDist& posterior, int w_cell, double y_observed,
                            double power, double noise_var);

/// Channel input the grid encoder would choose for cell `w_cell`.
double agn_pm_grid_input(const FiniteDist& posterior, int w_cell, double power);

}  // namespace cclab
