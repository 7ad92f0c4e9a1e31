#include "cclab/models.hpp"

#include <cmath>

namespace cclab {

StochKernel bsc(double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ModelError("bsc: epsilon must be in [0,1]");
  Matrix k(2, 2);
  k << 1.0 - epsilon, epsilon, epsilon, 1.0 - epsilon;
  return StochKernel(std::move(k));
}

StochKernel z_channel(double mu_delta, int num_inputs) {
  if (!(mu_delta >= 0.0 && mu_delta <= 1.0)) throw ModelError("z_channel: mu*delta must be in [0,1]");
  if (num_inputs < 2) throw ModelError("z_channel: need at least 2 input symbols");
  Matrix k(num_inputs, 2);
  k.row(0) << 1.0, 0.0;
  for (int x = 1; x < num_inputs; ++x) k.row(x) << 1.0 - mu_delta, mu_delta;
  return StochKernel(std::move(k));
}

StochKernel inverted_e_channel() {
  Matrix k(3, 2);
  k << 1.0, 0.0, 0.5, 0.5, 0.0, 1.0;
  return StochKernel(std::move(k));
}

QueueModel::QueueModel(double lam, double m, double d, int K)
    : lambda(lam), mu(m), delta(d), truncation(K) {
  if (!(lambda > 0.0 && lambda < mu)) throw ModelError("QueueModel: need 0 < lambda < mu");
  if (!(lambda * delta < 1.0 && mu * delta < 1.0))
    throw ModelError("QueueModel: need lambda*delta < 1 and mu*delta < 1");
  if (truncation < 1) throw ModelError("QueueModel: truncation must be >= 1");
  if (tail_mass() >= 1e-10)
    throw ModelError("QueueModel: geometric tail mass beyond K is not < 1e-10");
}

double QueueModel::tail_mass() const {
  return std::pow(rho(), truncation + 1);
}

MarkovSource queue_source(const QueueModel& q) {
  const int n = q.truncation + 1;
  const double ld = q.lambda * q.delta;
  Matrix kernel = Matrix::Zero(n, n);
  for (int w = 0; w + 1 < n; ++w) {
    kernel(w, w) = 1.0 - ld;
    kernel(w, w + 1) = ld;
  }
  kernel(n - 1, n - 1) = 1.0;  // top state absorbs; reachable mass is below the tail bound
  Vector init(n);
  for (int k = 0; k < n; ++k) init(k) = std::pow(q.rho(), k);
  return MarkovSource(FiniteDist::normalized(init), StochKernel(std::move(kernel)));
}

StochKernel queue_length_chain(const QueueModel& q) {
  const int n = q.truncation + 1;
  const double ld = q.lambda * q.delta;
  const double md = q.mu * q.delta;
  Matrix k = Matrix::Zero(n, n);
  for (int x = 0; x < n; ++x) {
    const double up = (x + 1 < n) ? ld * (x > 0 ? 1.0 - md : 1.0) : 0.0;
    const double down = (x > 0) ? md * (1.0 - ld) : 0.0;
    if (x + 1 < n) k(x, x + 1) = up;
    if (x > 0) k(x, x - 1) = down;
    k(x, x) = 1.0 - up - down;
  }
  return StochKernel(std::move(k));
}

StochKernel queue_rate_chain(const QueueModel& q) {
  const int n = q.truncation + 1;
  const double ld = q.lambda * q.delta;
  const double md = q.mu * q.delta;
  Matrix k = Matrix::Zero(n, n);
  for (int x = 0; x < n; ++x) {
    const double up = (x + 1 < n) ? ld : 0.0;
    const double down = (x > 0) ? md : 0.0;
    if (x + 1 < n) k(x, x + 1) = up;
    if (x > 0) k(x, x - 1) = down;
    k(x, x) = 1.0 - up - down;
  }
  return StochKernel(std::move(k));
}

FiniteDist queue_chain_stationary(const QueueModel& q) {
  // detailed balance of the sampled chain: pi_1/pi_0 = ld / (md (1-ld)),
  // pi_{k+1}/pi_k = ld (1-md) / (md (1-ld)) for k >= 1
  const int n = q.truncation + 1;
  const double ld = q.lambda * q.delta;
  const double md = q.mu * q.delta;
  Vector pi(n);
  pi(0) = 1.0;
  if (n > 1) pi(1) = ld / (md * (1.0 - ld));
  const double r = ld * (1.0 - md) / (md * (1.0 - ld));
  for (int k = 2; k < n; ++k) pi(k) = pi(k - 1) * r;
  return FiniteDist::normalized(pi);
}

FiniteDist queue_exact_stationary(const QueueModel& q) {
  // W_0 is the occupancy *before* the first arrival, so the loop is
  // stationary when W_0 follows the departure half-step of the chain law:
  // X_1 = W_0 + arrival ~ pi exactly
  const FiniteDist pi = queue_chain_stationary(q);
  const int n = q.truncation + 1;
  const double md = q.mu * q.delta;
  Vector tilde = Vector::Zero(n);
  for (int k = 0; k < n; ++k) {
    tilde(k) += pi(k) * (k > 0 ? 1.0 - md : 1.0);
    if (k + 1 < n) tilde(k) += pi(k + 1) * md;
  }
  return FiniteDist::normalized(tilde);
}

TrapdoorLaws trapdoor_source_and_init(const TrapdoorModel& t) {
  const double p = t.p;
  Vector in(2);
  in << p, 1.0 - p;
  Vector init(3);
  init << p * p, 2.0 * p * (1.0 - p), (1.0 - p) * (1.0 - p);
  Matrix k(3, 3);
  k << p, 1.0 - p, 0.0,
       0.5 * p, 0.5, 0.5 * (1.0 - p),
       0.0, p, 1.0 - p;
  return TrapdoorLaws{FiniteDist(std::move(in)), FiniteDist(std::move(init)),
                      StochKernel(std::move(k))};
}

MarkovSource trapdoor_counting_source(const TrapdoorModel& t, int horizon) {
  if (horizon < 1) throw ModelError("trapdoor_counting_source: horizon must be >= 1");
  const double p = t.p;
  const int n = horizon + 2;  // counts reach 1 + horizon
  Vector init = Vector::Zero(n);
  init(0) = p;        // ball initially in the slot is labeled 0
  init(1) = 1.0 - p;  // or labeled 1 (blue)
  Matrix k = Matrix::Zero(n, n);
  for (int w = 0; w + 1 < n; ++w) {
    k(w, w) = p;
    k(w, w + 1) = 1.0 - p;
  }
  k(n - 1, n - 1) = 1.0;
  return MarkovSource(FiniteDist(std::move(init)), StochKernel(std::move(k)));
}

GaussianModel gaussian_steady_state(double rho, double sigma_m2, double sigma_v2, double power) {
  if (!(std::abs(rho) < 1.0)) throw ModelError("gaussian_steady_state: need |rho| < 1");
  if (!(sigma_m2 > 0.0 && sigma_v2 > 0.0 && power > 0.0))
    throw ModelError("gaussian_steady_state: variances and power must be positive");

  const double shrink = rho * rho * sigma_v2 / (power + sigma_v2);
  const double C = sigma_m2 / (1.0 - shrink);

  // the closed form must be the fixed point of Cov' = shrink * Cov + sigma_m2
  double cov = C;
  for (int i = 0; i < 64; ++i) cov = shrink * cov + sigma_m2;
  if (std::abs(cov - C) > 1e-12 * std::max(1.0, std::abs(C)))
    throw ModelError("gaussian_steady_state: closed form disagrees with recursion fixed point");

  GaussianModel g;
  g.rho = rho;
  g.sigma_m2 = sigma_m2;
  g.sigma_v2 = sigma_v2;
  g.power = power;
  g.C = C;
  g.beta = std::sqrt(power / C);
  g.gamma = std::sqrt(power * C) / (power + sigma_v2);
  // Var(W_0) with rho^2 Var(W_0) + sigma_m2 = C, written in the delta-free form
  g.w0_var = sigma_m2 * sigma_v2 / (power + sigma_v2 * (1.0 - rho * rho));
  return g;
}

}  // namespace cclab
