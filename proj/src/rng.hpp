#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>

namespace afrlab {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seeded random source. mt19937_64 core with uniform doubles built
/// directly from the high 53 bits, so sequences are identical across
/// standard-library implementations. Substreams derived from (seed, label)
/// make generation independent of iteration or worker order.
class Rng {
 public:
  explicit Rng(uint64_t seed) : seed_(seed), gen_(splitmix64(seed)) {}

  uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  /// Index in [0, n).
  size_t below(size_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below: n must be positive");
    // Rejection sampling keeps the draw unbiased.
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t v = next_u64();
    while (v >= limit) v = next_u64();
    return static_cast<size_t>(v % n);
  }

  /// Inverse-CDF draw from an unnormalized weight vector.
  size_t categorical(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) {
      throw std::invalid_argument("Rng::categorical: weights must sum > 0");
    }
    double u = uniform() * total;
    double acc = 0.0;
    for (size_t i = 0; i + 1 < weights.size(); ++i) {
      acc += weights[i];
      if (u < acc) return i;
    }
    return weights.size() - 1;
  }

  uint64_t seed() const { return seed_; }

  /// Derived stream: deterministic in (seed, label), decorrelated from
  /// the parent and from other labels.
  Rng substream(uint64_t label) const {
    return Rng(splitmix64(seed_ ^ splitmix64(label ^ 0xa5a5a5a5a5a5a5a5ULL)));
  }

 private:
  uint64_t seed_;
  std::mt19937_64 gen_;
};

}  // namespace afrlab
