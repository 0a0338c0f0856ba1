#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace balds {

// SplitMix64 finalizer. Every source of randomness in the project goes
// through this mixer so results are identical across platforms and runs.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
  return mix64(a ^ (mix64(b) + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
}

constexpr double to_unit_interval(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;  // [0, 1)
}

// Counter-based uniform draw keyed by an arbitrary tuple of indices.
// Evaluation order and parallelism cannot change the value of any draw.
inline double counter_uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                              std::uint64_t c) {
  return to_unit_interval(mix64(hash_combine(hash_combine(hash_combine(seed, a), b), c)));
}

// Small sequential generator for shuffles, weight init and data synthesis.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(mix64(seed)) {}

  std::uint64_t next_bits() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  double uniform() { return to_unit_interval(next_bits()); }  // [0, 1)

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller, no caching so the draw count per call is fixed.
  double normal() {
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Modulo bias is negligible for n << 2^64 but avoid it anyway.
    std::uint64_t threshold = (0ULL - n) % n;
    for (;;) {
      std::uint64_t r = next_bits();
      if (r >= threshold) return r % n;
    }
  }

  template <typename T>
  void shuffle(std::vector<T>& xs) {
    for (std::size_t i = xs.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(xs[i - 1], xs[j]);
    }
  }

 private:
  std::uint64_t state_;
};

}  // namespace balds
