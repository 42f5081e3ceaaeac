#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace ldl::rng {

// SplitMix64 finalizer. Used to derive independent seed streams from a base
// seed plus structural coordinates (label index, pipeline stage, trial), so
// results do not depend on thread scheduling.
constexpr std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive(std::uint64_t seed, std::uint64_t stage,
                               std::uint64_t index = 0) {
  return mix(mix(seed ^ mix(stage)) ^ mix(index + 1));
}

// Stage tags for derived seed streams.
enum Stage : std::uint64_t {
  kTrValSplit = 1,
  kLabelFit = 2,
  kSpectralEmbed = 3,
  kBlocksPositive = 4,
  kBlocksNegative = 5,
  kBlocksUncertain = 6,
  kClusterPositive = 7,
  kClusterNegative = 8,
  kClusterUncertain = 9,
};

class Engine {
 public:
  explicit Engine(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }

  // Uniform integer in [0, n), n >= 1. Rejection sampling keeps the result
  // independent of the standard library's distribution internals.
  std::uint64_t bounded(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      std::uint64_t r = gen_();
      if (r >= threshold) return r % n;
    }
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller (no cached spare; deterministic stream).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.283185307179586477 * u2);
  }

 private:
  std::mt19937_64 gen_;
};

// In-place Fisher-Yates shuffle with an explicit engine.
template <typename T>
void shuffle(std::vector<T>& v, Engine& eng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(eng.bounded(i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace ldl::rng
