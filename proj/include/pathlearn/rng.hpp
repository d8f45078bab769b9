#pragma once

#include <cstdint>
#include <random>

namespace pathlearn {

/// SplitMix64 finalizer. Used to derive independent 64-bit stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seeded generator with platform-independent draws.
///
/// The standard distributions are implementation-defined, so uniforms are
/// built directly from the 64-bit engine output (53 mantissa bits). Each
/// replica gets its own stream via `Rng::stream(seed, index)`.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  static Rng stream(std::uint64_t seed, std::uint64_t index) {
    return Rng(splitmix64(seed) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
  }

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace pathlearn
