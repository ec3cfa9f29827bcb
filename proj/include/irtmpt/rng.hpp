#pragma once

#include <cstdint>

namespace irtmpt {

/// Counter-based generator: every draw is a pure function of
/// (seed, stream, counter), so substreams can be consumed in any order
/// or on any thread and still reproduce the same values.
class CounterRng {
 public:
  constexpr CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix(seed ^ 0x6a09e667f3bcc909ULL) ^ mix(stream + 0xbb67ae8584caa73bULL)) {}

  constexpr std::uint64_t bits(std::uint64_t counter) const {
    return mix(key_ ^ mix(counter + 0x3c6ef372fe94f82bULL));
  }

  /// Uniform on [0,1) with 53 random bits.
  constexpr double uniform(std::uint64_t counter) const {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

  // splitmix64 finalizer
  static constexpr std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t key_;
};

/// Sequential view over one CounterRng stream.
class DrawSequence {
 public:
  explicit DrawSequence(CounterRng rng) : rng_(rng) {}

  double uniform() { return rng_.uniform(next_++); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t draws_used() const { return next_; }

 private:
  CounterRng rng_;
  std::uint64_t next_ = 0;
};

}  // namespace irtmpt
