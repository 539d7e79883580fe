#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>

namespace animesh {

/// Seeded random stream with named substreams.
///
/// All randomness in the pipeline flows from a single root seed; stages
/// derive their own stream via fork("clustering"), fork("camera"), ... so
/// they can be re-run independently yet reproducibly. The engine is
/// std::mt19937_64 (fully specified by the standard); the uniform/normal
/// mappings are spelled out here instead of using std distributions, whose
/// output sequences are implementation-defined. Streams are value types:
/// copying one snapshots its state, which tests use to replay draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed), root_(seed) {}

  /// Uniform double in [0, 1).
  double uniform() { return std::ldexp(static_cast<double>(engine_() >> 11), -53); }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

  /// Uniform index in [0, n). n must be > 0.
  std::size_t uniform_index(std::size_t n) {
    std::size_t i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
    return i < n ? i : n - 1;
  }

  /// Standard normal via Box-Muller. Consumes exactly two uniforms per call
  /// (no cached spare), so streams can be replayed draw-for-draw.
  double normal() {
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Derive an independent substream from a name (and optional index).
  /// Forks depend on the root seed only, not on how much of this stream
  /// has been consumed.
  Rng fork(std::string_view name, std::uint64_t index = 0) const {
    std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a over the name
    for (char c : name) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ull;
    }
    return Rng(mix(root_ ^ mix(h + 0x9e3779b97f4a7c15ull * (index + 1))));
  }

  std::uint64_t root_seed() const { return root_; }

 private:
  static std::uint64_t mix(std::uint64_t z) {  // splitmix64 finalizer
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::mt19937_64 engine_;
  std::uint64_t root_;
};

}  // namespace animesh
