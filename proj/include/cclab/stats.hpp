#pragma once

#include <utility>
#include <vector>

#include "cclab/common.hpp"

namespace cclab {

/// Regularized upper incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a).
double gamma_q(double a, double x);

/// Chi-square survival function P(X > x) with k degrees of freedom.
double chi2_sf(double x, int k);

/// Inverse standard normal CDF (Acklam rational approximation plus one
/// Halley refinement against erfc; ~1e-15 relative accuracy).
double normal_quantile(double p);

struct Chi2Result {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

/// Pearson chi-square independence test on a sample of symbol pairs.
/// Cells are the observed contingency table; requires >= 100 samples.
Chi2Result chi2_independence(const std::vector<std::pair<int, int>>& pairs);

/// Chi-square goodness-of-fit of observed symbols against a given pmf.
Chi2Result chi2_goodness(const std::vector<int>& samples, const std::vector<double>& pmf);

/// One-sample Kolmogorov-Smirnov test against Uniform[0,1].
/// Returns the asymptotic p-value (with the standard small-sample correction).
double ks_uniform(std::vector<double> samples);

/// Sample autocorrelation at the given lag.
double autocorr(const std::vector<double>& samples, int lag);

}  // namespace cclab
