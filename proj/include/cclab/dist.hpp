#pragma once

#include <Eigen/Dense>

#include "cclab/common.hpp"

namespace cclab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Absolute tolerance for "sums to one" checks on probability vectors.
inline constexpr double kSimplexTol = 1e-12;

// ---------------------------------------------------------------------------
// FiniteDist: a probability vector on a finite alphabet.  The universal
// carrier for beliefs, channel input distributions and stationary laws.
// Entries are kept as-is after normalization; values below 1e-300 are *not*
// clipped to zero, because support membership (not magnitude) drives the
// infinite-cost branches downstream.
// ---------------------------------------------------------------------------
class FiniteDist {
 public:
  /// Validating constructor: entries >= 0 and summing to 1 within 1e-12.
  explicit FiniteDist(Vector p) : p_(std::move(p)) {
    if (p_.size() == 0) throw DimensionError("FiniteDist: empty vector");
    for (Eigen::Index i = 0; i < p_.size(); ++i) {
      if (!(p_(i) >= 0.0))
        throw ModelError("FiniteDist: negative or NaN entry at index " + std::to_string(i));
    }
    const double s = p_.sum();
    if (std::abs(s - 1.0) > kSimplexTol)
      throw ModelError("FiniteDist: entries sum to " + std::to_string(s) + ", not 1");
  }

  /// Rescale a non-negative vector with positive mass onto the simplex.
  static FiniteDist normalized(const Vector& raw) {
    const double s = raw.sum();
    if (!(s > 0.0)) throw ModelError("FiniteDist::normalized: total mass is not positive");
    return FiniteDist(Vector(raw / s));
  }

  static FiniteDist uniform(int n) {
    return FiniteDist(Vector::Constant(n, 1.0 / static_cast<double>(n)));
  }

  static FiniteDist point_mass(int n, int at) {
    if (at < 0 || at >= n) throw DimensionError("FiniteDist::point_mass: index out of range");
    Vector p = Vector::Zero(n);
    p(at) = 1.0;
    return FiniteDist(std::move(p));
  }

  int size() const { return static_cast<int>(p_.size()); }
  double operator()(int i) const { return p_(i); }
  const Vector& vec() const { return p_; }

  bool operator==(const FiniteDist& o) const { return p_ == o.p_; }

 private:
  Vector p_;
};

/// A belief is a distribution over the source alphabet; same invariants.
using Belief = FiniteDist;

// ---------------------------------------------------------------------------
// StochKernel: a row-stochastic conditional distribution.  Row u is the
// distribution of the output given input symbol u.  Houses both the source
// kernel Q(w'|w) and the channel P(y|x).
// ---------------------------------------------------------------------------
class StochKernel {
 public:
  explicit StochKernel(Matrix rows) : k_(std::move(rows)) {
    if (k_.rows() == 0 || k_.cols() == 0) throw DimensionError("StochKernel: empty matrix");
    for (Eigen::Index r = 0; r < k_.rows(); ++r) {
      for (Eigen::Index c = 0; c < k_.cols(); ++c) {
        if (!(k_(r, c) >= 0.0))
          throw ModelError("StochKernel: negative or NaN entry in row " + std::to_string(r));
      }
      if (std::abs(k_.row(r).sum() - 1.0) > kSimplexTol)
        throw ModelError("StochKernel: row " + std::to_string(r) + " does not sum to 1");
    }
  }

  static StochKernel identity(int n) { return StochKernel(Matrix::Identity(n, n)); }

  int input_size() const { return static_cast<int>(k_.rows()); }
  int output_size() const { return static_cast<int>(k_.cols()); }

  /// P(output = y | input = u).
  double operator()(int u, int y) const { return k_(u, y); }

  FiniteDist row(int u) const { return FiniteDist(Vector(k_.row(u))); }

  /// Output marginal induced by an input distribution.
  FiniteDist push(const FiniteDist& input) const {
    if (input.size() != input_size())
      throw DimensionError("StochKernel::push: input distribution size mismatch");
    return FiniteDist::normalized(Vector(k_.transpose() * input.vec()));
  }

  const Matrix& matrix() const { return k_; }

 private:
  Matrix k_;
};

// ---------------------------------------------------------------------------
// CostedChannel: a memoryless channel together with a per-input-symbol cost
// and a budget, the data of the capacity-cost problem.
// ---------------------------------------------------------------------------
struct CostedChannel {
  StochKernel kernel;
  Vector eta;     // cost per input symbol, >= 0
  double budget;  // expected-cost bound

  CostedChannel(StochKernel k, Vector cost, double bound)
      : kernel(std::move(k)), eta(std::move(cost)), budget(bound) {
    if (eta.size() != kernel.input_size())
      throw DimensionError("CostedChannel: eta length != input alphabet size");
    for (Eigen::Index i = 0; i < eta.size(); ++i)
      if (!(eta(i) >= 0.0)) throw ModelError("CostedChannel: eta must be non-negative");
    if (!(budget >= 0.0)) throw ModelError("CostedChannel: budget must be non-negative");
  }
};

}  // namespace cclab
