#include "cclab/posterior_matching.hpp"

#include <algorithm>
#include <cmath>

#include "cclab/parallel.hpp"
#include "cclab/rng.hpp"

namespace cclab {

namespace {
constexpr double kMergeTol = 1e-14;     // equal-density merge threshold (relative)
constexpr double kCollapseTol = 1e-15;  // minimum piece width
}  // namespace

PiecewisePosterior::PiecewisePosterior(std::vector<double> breakpoints,
                                       std::vector<double> densities) {
  if (breakpoints.size() != densities.size() + 1 || densities.empty())
    throw DimensionError("PiecewisePosterior: need k+1 breakpoints for k pieces");
  if (breakpoints.front() != 0.0 || breakpoints.back() != 1.0)
    throw ModelError("PiecewisePosterior: breakpoints must span [0,1]");
  for (std::size_t j = 0; j + 1 < breakpoints.size(); ++j)
    if (!(breakpoints[j] < breakpoints[j + 1]))
      throw ModelError("PiecewisePosterior: breakpoints must be strictly increasing");
  for (double d : densities)
    if (!(d >= 0.0)) throw ModelError("PiecewisePosterior: negative density");

  // hygiene, mass-preserving: a breakpoint closer than 1e-15 to its neighbor
  // collapses only when the sliver's mass is negligible (deep runs
  // legitimately concentrate most of the mass on sub-1e-15 pieces, which must
  // survive); adjacent pieces with equal densities merge exactly
  breaks_.push_back(0.0);
  double pending_mass = 0.0;  // mass of folded slivers awaiting the next piece
  for (std::size_t j = 0; j < densities.size(); ++j) {
    const double hi = breakpoints[j + 1];
    const double width = hi - breaks_.back();
    const double mass = densities[j] * (breakpoints[j + 1] - breakpoints[j]);
    if (width < kCollapseTol && hi != 1.0 && mass < 1e-15) {
      pending_mass += mass;
      continue;
    }
    double density = densities[j];
    if (pending_mass > 0.0 && width > 0.0) {
      density = (mass + pending_mass) / width;  // spread the folded mass
      pending_mass = 0.0;
    }
    if (!dens_.empty()) {
      const double scale = std::max({1.0, dens_.back(), density});
      if (std::abs(dens_.back() - density) <= kMergeTol * scale) {
        breaks_.back() = hi;
        continue;
      }
    }
    breaks_.push_back(hi);
    dens_.push_back(density);
  }
  breaks_.back() = 1.0;
  if (pending_mass > 0.0 && !dens_.empty()) {
    // trailing slivers fold backward into the final piece
    const std::size_t last = dens_.size() - 1;
    const double width = breaks_[last + 1] - breaks_[last];
    dens_[last] += pending_mass / width;
  }

  const double total = total_mass();
  if (std::abs(total - 1.0) > 1e-12)
    throw ModelError("PiecewisePosterior: mass is " + std::to_string(total) + ", not 1");
}

PiecewisePosterior PiecewisePosterior::uniform() {
  return PiecewisePosterior({0.0, 1.0}, {1.0});
}

double PiecewisePosterior::total_mass() const {
  double m = 0.0;
  for (std::size_t j = 0; j < dens_.size(); ++j) m += dens_[j] * (breaks_[j + 1] - breaks_[j]);
  return m;
}

double PiecewisePosterior::cdf(double w) const {
  if (w <= 0.0) return 0.0;
  if (w >= 1.0) return 1.0;
  double c = 0.0;
  for (std::size_t j = 0; j < dens_.size(); ++j) {
    if (w <= breaks_[j + 1]) return c + dens_[j] * (w - breaks_[j]);
    c += dens_[j] * (breaks_[j + 1] - breaks_[j]);
  }
  return 1.0;
}

double PiecewisePosterior::mass(double a, double b) const {
  return std::max(0.0, cdf(b) - cdf(a));
}

double PiecewisePosterior::median() const {
  double c = 0.0;
  for (std::size_t j = 0; j < dens_.size(); ++j) {
    const double piece = dens_[j] * (breaks_[j + 1] - breaks_[j]);
    if (c + piece >= 0.5) {
      if (dens_[j] == 0.0) return breaks_[j];  // CDF flat at exactly 1/2: take the left edge
      return breaks_[j] + (0.5 - c) / dens_[j];
    }
    c += piece;
  }
  return 1.0;
}

double pm_encoder_step(double w, const PiecewisePosterior& posterior,
                       const std::function<double(double)>& input_cdf_inverse) {
  if (!(w >= 0.0 && w <= 1.0)) throw PreconditionError("pm_encoder_step: message not in [0,1]");
  return input_cdf_inverse(posterior.cdf(w));
}

int pm_bsc_input(double w, const PiecewisePosterior& posterior) {
  return w >= posterior.median() ? 1 : 0;
}

PiecewisePosterior bsc_posterior_update(const PiecewisePosterior& posterior, int y,
                                        double epsilon) {
  if (y != 0 && y != 1) throw PreconditionError("bsc_posterior_update: y must be 0 or 1");
  if (!(epsilon >= 0.0 && epsilon <= 1.0))
    throw ModelError("bsc_posterior_update: epsilon must be in [0,1]");
  const double m = posterior.median();
  // the side consistent with y ([m,1] for y=1, [0,m) for y=0) scales by
  // 2(1-eps), the other by 2 eps; the normalizer is exactly 1/2 at the median
  const double left_scale = (y == 0) ? 2.0 * (1.0 - epsilon) : 2.0 * epsilon;
  const double right_scale = (y == 1) ? 2.0 * (1.0 - epsilon) : 2.0 * epsilon;

  std::vector<double> breaks, dens;
  breaks.push_back(0.0);
  const auto& bp = posterior.breakpoints();
  const auto& dp = posterior.densities();
  for (std::size_t j = 0; j < dp.size(); ++j) {
    const double lo = bp[j], hi = bp[j + 1];
    if (m > lo && m < hi) {
      breaks.push_back(m);
      dens.push_back(dp[j] * left_scale);
    }
    breaks.push_back(hi);
    dens.push_back(dp[j] * (hi <= m ? left_scale : right_scale));
  }
  // exact renormalization absorbs the accumulated rounding
  double total = 0.0;
  for (std::size_t j = 0; j < dens.size(); ++j) total += dens[j] * (breaks[j + 1] - breaks[j]);
  for (double& d : dens) d /= total;
  return PiecewisePosterior(std::move(breaks), std::move(dens));
}

PMRun pm_bsc_run(double epsilon, int horizon, std::uint64_t seed, std::uint64_t stream) {
  if (horizon < 1) throw PreconditionError("pm_bsc_run: horizon must be >= 1");
  RngStream rng(seed, stream);
  PMRun run;
  run.seed = seed;
  run.stream = stream;
  run.horizon = horizon;
  run.epsilon = epsilon;
  run.w = rng.uniform();
  PiecewisePosterior post = PiecewisePosterior::uniform();
  for (int i = 1; i <= horizon; ++i) {
    run.median_before.push_back(post.median());
    run.cdf_at_w_before.push_back(post.cdf(run.w));
    const int x = pm_bsc_input(run.w, post);
    const int y = rng.bernoulli(epsilon) ? 1 - x : x;
    run.x.push_back(x);
    run.y.push_back(y);
    post = bsc_posterior_update(post, y, epsilon);
    run.post.push_back(post);
  }
  return run;
}

std::vector<double> achievability_mass(const PMRun& run, double rate_bits) {
  if (static_cast<int>(run.post.size()) != run.horizon)
    throw PreconditionError("achievability_mass: run is incomplete");
  std::vector<double> out;
  out.reserve(run.horizon);
  for (int i = 1; i <= run.horizon; ++i) {
    const double cell = std::exp2(-static_cast<double>(i) * rate_bits);
    double lo = std::floor(run.w / cell) * cell;
    if (lo >= 1.0) lo = 1.0 - cell;
    out.push_back(run.post[i - 1].mass(lo, std::min(lo + cell, 1.0)));
  }
  return out;
}

PMInvarianceChecks pm_invariance_checks(double epsilon, int horizon, int trials,
                                        std::uint64_t seed,
                                        const std::vector<int>& checkpoints,
                                        double median_override) {
  if (trials < 10000) throw PreconditionError("pm_invariance_checks: need >= 1e4 trials");
  for (int i : checkpoints)
    if (i < 2 || i > horizon)
      throw PreconditionError("pm_invariance_checks: checkpoints must lie in [2, horizon]");

  const std::size_t ncp = checkpoints.size();
  std::vector<std::vector<double>> cdf_samples(ncp, std::vector<double>(trials));
  std::vector<std::vector<int>> input_samples(ncp, std::vector<int>(trials));
  std::vector<std::vector<std::pair<int, int>>> pair_samples(
      ncp, std::vector<std::pair<int, int>>(trials));

  // one stream per trial; slot-indexed writes keep the result independent of
  // the worker-pool schedule
  parallel_for(trials, [&](int t) {
    RngStream rng(seed, static_cast<std::uint64_t>(t));
    const double w = rng.uniform();
    PiecewisePosterior post = PiecewisePosterior::uniform();
    int prev_y = -1;
    for (int i = 1; i <= horizon; ++i) {
      const double med = (median_override >= 0.0) ? median_override : post.median();
      const double cdf_w = post.cdf(w);
      const int x = (w >= med) ? 1 : 0;
      const int y = rng.bernoulli(epsilon) ? 1 - x : x;
      for (std::size_t c = 0; c < ncp; ++c) {
        if (checkpoints[c] == i) {
          cdf_samples[c][t] = cdf_w;
          input_samples[c][t] = x;
          pair_samples[c][t] = {prev_y, y};
        }
      }
      // the decoder still runs the true median update; overriding only the
      // encoder threshold is what breaks the matching property
      post = bsc_posterior_update(post, y, epsilon);
      prev_y = y;
    }
  });

  PMInvarianceChecks out;
  out.trials = trials;
  for (std::size_t c = 0; c < ncp; ++c) {
    PMInvarianceChecks::Checkpoint cp;
    cp.i = checkpoints[c];
    cp.ks_uniform_p = ks_uniform(cdf_samples[c]);
    cp.chi2_input_p = chi2_goodness(input_samples[c], {0.5, 0.5}).p_value;
    cp.chi2_indep_p = chi2_independence(pair_samples[c]).p_value;
    out.checkpoints.push_back(cp);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Message-grid PM over the additive Gaussian channel.
// ---------------------------------------------------------------------------

double agn_pm_grid_input(const FiniteDist& posterior, int w_cell, double power) {
  if (w_cell < 0 || w_cell >= posterior.size())
    throw DimensionError("agn_pm_grid_input: cell out of range");
  double below = 0.0;
  for (int k = 0; k < w_cell; ++k) below += posterior(k);
  const double u = below + 0.5 * posterior(w_cell);  // mid-cell CDF convention
  return std::sqrt(power) * normal_quantile(std::clamp(u, 1e-15, 1.0 - 1e-15));
}

GridPMStep agn_pm_grid_step(const FiniteDist& posterior, int w_cell, double y_observed,
                            double power, double noise_var) {
  const int m = posterior.size();
  Vector updated(m);
  double x_true = 0.0;
  double below = 0.0;
  for (int k = 0; k < m; ++k) {
    const double u = below + 0.5 * posterior(k);
    below += posterior(k);
    const double xk =
        std::sqrt(power) * normal_quantile(std::clamp(u, 1e-15, 1.0 - 1e-15));
    if (k == w_cell) x_true = xk;
    const double r = y_observed - xk;
    updated(k) = posterior(k) * std::exp(-0.5 * r * r / noise_var);
  }
  return GridPMStep{x_true, FiniteDist::normalized(updated)};
}

}  // namespace cclab
