#pragma once

#include <cmath>
#include <cstdint>

namespace cclab {

// ---------------------------------------------------------------------------
// RngStream: xoshiro256++ seeded through splitmix64 from (seed, stream index).
// Identical (seed, index) pairs produce identical draw sequences on every
// platform; Monte Carlo trials take one stream each so parallel execution is
// order-independent.  No global state anywhere.
// ---------------------------------------------------------------------------
class RngStream {
 public:
  explicit RngStream(uint64_t seed, uint64_t stream = 0) {
    // mix the stream index into the splitmix64 seed; the golden-ratio
    // increment keeps nearby streams decorrelated
    uint64_t x = seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1));
    for (auto& word : s_) word = splitmix64(x);
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;  // all-zero state is invalid
  }

  uint64_t next_u64() {
    const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in (0, 1] (safe as a log argument).
  double uniform_pos() { return 1.0 - uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  /// Integer in [0, n).
  int uniform_int(int n) { return static_cast<int>(uniform() * n) % n; }

  /// Standard normal via Box-Muller (explicit, not std::normal_distribution,
  /// which is implementation-defined and would break cross-platform replay).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  static uint64_t splitmix64(uint64_t& x) {
    uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  uint64_t s_[4];
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace cclab
