#include "cclab/stats.hpp"

#include <algorithm>
#include <cmath>

namespace cclab {

namespace {

// Regularized lower incomplete gamma by series expansion; valid for x < a+1.
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int n = 0; n < 500; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Regularized upper incomplete gamma by Lentz continued fraction; x >= a+1.
double gamma_q_contfrac(double a, double x) {
  constexpr double kTiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_q(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw PreconditionError("gamma_q: need a > 0, x >= 0");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_contfrac(a, x);
}

double chi2_sf(double x, int k) {
  if (k <= 0) throw PreconditionError("chi2_sf: dof must be positive");
  if (x <= 0.0) return 1.0;
  return gamma_q(0.5 * k, 0.5 * x);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw PreconditionError("normal_quantile: p must be in (0,1)");
  // Acklam's rational approximation
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // one Halley step against the exact CDF expressed through erfc
  const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

Chi2Result chi2_independence(const std::vector<std::pair<int, int>>& pairs) {
  if (pairs.size() < 100)
    throw PreconditionError("chi2_independence: need at least 100 samples");
  int rmax = 0, cmax = 0;
  for (const auto& [r, c] : pairs) {
    rmax = std::max(rmax, r);
    cmax = std::max(cmax, c);
  }
  const int R = rmax + 1, C = cmax + 1;
  std::vector<double> table(static_cast<size_t>(R) * C, 0.0);
  std::vector<double> rowsum(R, 0.0), colsum(C, 0.0);
  for (const auto& [r, c] : pairs) {
    table[static_cast<size_t>(r) * C + c] += 1.0;
    rowsum[r] += 1.0;
    colsum[c] += 1.0;
  }
  const double n = static_cast<double>(pairs.size());
  Chi2Result out;
  int active_rows = 0, active_cols = 0;
  for (int r = 0; r < R; ++r) active_rows += rowsum[r] > 0.0;
  for (int c = 0; c < C; ++c) active_cols += colsum[c] > 0.0;
  out.dof = std::max(1, (active_rows - 1) * (active_cols - 1));
  for (int r = 0; r < R; ++r) {
    for (int c = 0; c < C; ++c) {
      const double expected = rowsum[r] * colsum[c] / n;
      if (expected == 0.0) continue;
      const double diff = table[static_cast<size_t>(r) * C + c] - expected;
      out.statistic += diff * diff / expected;
    }
  }
  out.p_value = chi2_sf(out.statistic, out.dof);
  return out;
}

Chi2Result chi2_goodness(const std::vector<int>& samples, const std::vector<double>& pmf) {
  if (samples.size() < 100) throw PreconditionError("chi2_goodness: need at least 100 samples");
  std::vector<double> counts(pmf.size(), 0.0);
  for (int s : samples) {
    if (s < 0 || s >= static_cast<int>(pmf.size()))
      throw DimensionError("chi2_goodness: sample outside pmf support");
    counts[s] += 1.0;
  }
  const double n = static_cast<double>(samples.size());
  Chi2Result out;
  out.dof = 0;
  for (size_t k = 0; k < pmf.size(); ++k) {
    const double expected = n * pmf[k];
    if (expected == 0.0) {
      if (counts[k] > 0.0) throw ModelError("chi2_goodness: observed symbol has pmf 0");
      continue;
    }
    const double diff = counts[k] - expected;
    out.statistic += diff * diff / expected;
    ++out.dof;
  }
  out.dof = std::max(1, out.dof - 1);
  out.p_value = chi2_sf(out.statistic, out.dof);
  return out;
}

double ks_uniform(std::vector<double> samples) {
  if (samples.size() < 100) throw PreconditionError("ks_uniform: need at least 100 samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (size_t i = 0; i < samples.size(); ++i) {
    const double u = std::clamp(samples[i], 0.0, 1.0);
    d = std::max(d, std::abs((i + 1.0) / n - u));
    d = std::max(d, std::abs(u - i / n));
  }
  // Kolmogorov asymptotic distribution with Stephens' finite-n correction
  const double sq = std::sqrt(n);
  const double lambda = (sq + 0.12 + 0.11 / sq) * d;
  double p = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = 2.0 * ((k % 2 == 1) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
    p += term;
    if (std::abs(term) < 1e-16) break;
  }
  return std::clamp(p, 0.0, 1.0);
}

double autocorr(const std::vector<double>& samples, int lag) {
  if (lag <= 0 || samples.size() < static_cast<size_t>(lag) + 100)
    throw PreconditionError("autocorr: need lag >= 1 and at least lag + 100 samples");
  const size_t n = samples.size();
  double mean = 0.0;
  for (double s : samples) mean += s;
  mean /= static_cast<double>(n);
  double var = 0.0, cov = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double c = samples[i] - mean;
    var += c * c;
    if (i + lag < n) cov += c * (samples[i + lag] - mean);
  }
  if (var == 0.0) return 0.0;
  return cov / var;
}

}  // namespace cclab
