#pragma once

#include <cstdint>

namespace stochif {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based generator: value (seed, stream, index, component) is a pure
/// function of its arguments, so samples do not depend on generation order.
class CounterRng {
 public:
  constexpr CounterRng(std::uint64_t seed, std::uint64_t stream) : key_(mix64(mix64(seed) ^ stream)) {}

  constexpr std::uint64_t bits(std::uint64_t index, std::uint64_t component) const {
    return mix64(mix64(key_ ^ index) + component);
  }
  /// Uniform on [0, 1) with 53 random bits.
  constexpr double uniform(std::uint64_t index, std::uint64_t component) const {
    return static_cast<double>(bits(index, component) >> 11) * 0x1.0p-53;
  }
  /// Uniform on [lo, hi).
  constexpr double uniform(std::uint64_t index, std::uint64_t component, double lo, double hi) const {
    return lo + (hi - lo) * uniform(index, component);
  }

 private:
  std::uint64_t key_;
};

/// Sequential generator for weight initialization; one stream per seed.
class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) : state_(seed) {}
  constexpr std::uint64_t next() {
    const std::uint64_t z = mix64(state_);
    state_ += 0x9e3779b97f4a7c15ULL;
    return z;
  }
  constexpr double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

}  // namespace stochif
