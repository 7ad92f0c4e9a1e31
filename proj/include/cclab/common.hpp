#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace cclab {

// ---------------------------------------------------------------------------
// Error taxonomy.  All library failures derive from Error so callers can
// distinguish "bad inputs" from programming mistakes (which assert).
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Alphabet / vector dimensions do not line up.
struct DimensionError : Error {
  using Error::Error;
};

/// Model parameter outside its admissible range.
struct ModelError : Error {
  using Error::Error;
};

/// An exact enumeration would exceed the configured atom/policy cap.
struct EnumerationLimitError : Error {
  using Error::Error;
};

/// Iterative solver failed to reach its tolerance within the iteration cap.
struct ConvergenceError : Error {
  double residual = std::numeric_limits<double>::quiet_NaN();
  ConvergenceError(const std::string& msg, double res) : Error(msg), residual(res) {}
};

/// Constraint set is empty (e.g. capacity-cost budget below the cheapest input).
struct InfeasibleError : Error {
  using Error::Error;
};

/// Bayes update conditioned on an observation of probability zero.
struct ImpossibleObservationError : Error {
  using Error::Error;
};

/// A statistical premise required by a derivation does not hold on the inputs.
struct PremiseViolationError : Error {
  using Error::Error;
};

/// Operation called outside its stated precondition.
struct PreconditionError : Error {
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Extended reals.  Divergences and log-likelihood-ratio costs take the value
// +inf when absolute continuity fails.  The sentinel is explicit so that it
// never leaks into a floating-point sum unnoticed: any aggregate containing
// the sentinel is sentinel-valued.
// ---------------------------------------------------------------------------

class ExtReal {
 public:
  constexpr ExtReal() : v_(0.0), inf_(false) {}
  constexpr ExtReal(double v) : v_(v), inf_(false) {}  // NOLINT: implicit by design

  static constexpr ExtReal infinity() {
    ExtReal x;
    x.inf_ = true;
    return x;
  }

  constexpr bool is_inf() const { return inf_; }
  /// Finite value; calling this on the sentinel is a programming error.
  double value() const {
    if (inf_) throw PreconditionError("ExtReal::value() on +inf sentinel");
    return v_;
  }
  /// Finite value, or +inf as an IEEE double (reporting only).
  constexpr double as_double() const {
    return inf_ ? std::numeric_limits<double>::infinity() : v_;
  }

  friend constexpr ExtReal operator+(ExtReal a, ExtReal b) {
    if (a.inf_ || b.inf_) return infinity();
    return ExtReal(a.v_ + b.v_);
  }
  ExtReal& operator+=(ExtReal o) { return *this = *this + o; }

  /// Scale by a non-negative weight; 0 * inf = 0 (the measure-theoretic
  /// convention used in every expectation in this library).
  friend constexpr ExtReal operator*(double w, ExtReal a) {
    if (w == 0.0) return ExtReal(0.0);
    if (a.inf_) return infinity();
    return ExtReal(w * a.v_);
  }

  friend constexpr bool operator<(ExtReal a, ExtReal b) {
    if (a.inf_) return false;
    if (b.inf_) return true;
    return a.v_ < b.v_;
  }
  friend constexpr bool operator==(ExtReal a, ExtReal b) {
    if (a.inf_ || b.inf_) return a.inf_ == b.inf_;
    return a.v_ == b.v_;
  }
  friend constexpr bool operator<=(ExtReal a, ExtReal b) { return a < b || a == b; }

 private:
  double v_;
  bool inf_;
};

// ---------------------------------------------------------------------------
// Logarithm conventions.  All internal math is in nats; reporting surfaces
// convert on the way out.
// ---------------------------------------------------------------------------

enum class LogBase { nats, bits };

inline double convert_from_nats(double nats, LogBase base) {
  return base == LogBase::nats ? nats : nats / std::numbers::ln2;
}

inline constexpr double kLn2 = 0.6931471805599453094172321214581766;

/// Binary entropy in nats.
inline double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log(p) - (1.0 - p) * std::log(1.0 - p);
}

}  // namespace cclab
