#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace mcsched {

/// Seeded generator with platform-stable transforms.
///
/// std::mt19937_64's output sequence is fixed by the standard, but the
/// standard distributions are not, so the transforms live here. Every
/// seeded artifact (instances, traces, curves) is reproducible across
/// standard library implementations.
class Rng {
 public:
  Rng() : engine_(0) {}
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double exponential(double mean) { return -mean * std::log1p(-uniform()); }

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform index in [0, k). Requires k > 0.
  std::uint64_t index(std::uint64_t k) {
    // Rejection sampling keeps the draw unbiased.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % k;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % k;
  }

  /// Fresh 64-bit value, used to derive child seeds.
  std::uint64_t next() { return engine_(); }

  /// Standard normal via Box-Muller.
  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  bool operator==(const Rng& other) const { return engine_ == other.engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace mcsched
