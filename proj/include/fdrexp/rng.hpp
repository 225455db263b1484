#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace fdrexp {

/// Name recorded in run manifests for the generator family below.
inline constexpr std::string_view kGeneratorName = "mt19937_64/splitmix64-substreams";

/// SplitMix64 finalizer; used as the hash that derives per-task substreams.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed for task `index` under `master`: master XOR hash(index).
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return master ^ splitmix64(index);
}

/// Reproducible stream of uniforms and exponentials. The engine output is
/// fixed by the C++ standard, and the transforms below avoid the
/// implementation-defined std distributions, so draws are bit-identical
/// across standard libraries.
class RandomStream {
public:
  explicit RandomStream(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  /// Uniform on (0, 1], 53-bit resolution.
  double uniform_open_closed() {
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
  }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Exp(mean) by inversion.
  double exponential(double mean) { return -mean * std::log(uniform_open_closed()); }

private:
  std::mt19937_64 engine_;
};

}  // namespace fdrexp
