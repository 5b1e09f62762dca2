#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace deepfeat {

// Deterministic random source. std::mt19937_64 produces a sequence fixed by
// the standard, but the <random> distributions do not, so every mapping from
// raw draws to values is written out here. Identical seeds therefore yield
// identical bytes on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1), 53 usable bits.
  double unit() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform in [-scale, scale).
  double symmetric(double scale) { return (2.0 * unit() - 1.0) * scale; }

  float symmetric_f32(double scale) {
    return static_cast<float>(symmetric(scale));
  }

  // Uniform in [lo, hi).
  double range(double lo, double hi) { return lo + (hi - lo) * unit(); }

  // Uniform integer in [0, n). Multiply-shift mapping; the bias is far below
  // anything observable at the draw counts used here.
  std::uint64_t below(std::uint64_t n) {
    using u128 = unsigned __int128;
    return static_cast<std::uint64_t>((static_cast<u128>(engine_()) * n) >> 64);
  }

  // Standard normal via Box-Muller. Deterministic given a fixed libm.
  double gaussian() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const double u1 = 1.0 - unit();  // (0, 1], keeps log finite
    const double u2 = unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    cached_ = r * std::sin(theta);
    has_cached_ = true;
    return r * std::cos(theta);
  }

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

// Stable mixing of a master seed with a stream id (splitmix64 finalizer), so
// one user-facing seed can drive several independent generators.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace deepfeat
