#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace pareidolia {

// ============================================================================
// Deterministic random numbers.
//
// Everything stochastic in this project derives from the splitmix64 counter
// generator so that runs are reproducible bit-for-bit from a single 64-bit
// seed, and so that the exact stream can be re-derived in any language:
//
//   mix64(z):  z  = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//              z  = (z ^ (z >> 27)) * 0x94D049BB133111EB
//              return z ^ (z >> 31)
//   output j of stream(seed) = mix64(seed + j * 0x9E3779B97F4A7C15),  j = 1,2,...
//   child_seed(seed, k)      = mix64(seed + (k + 1) * 0x9E3779B97F4A7C15)
//
// child_seed(seed, k) equals output k+1 of the parent stream, so batch
// element k can be generated without touching elements 0..k-1.  Derived
// quantities are documented next to their samplers below; see the README
// for the full stream contract.
// ============================================================================

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ull;

[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Seed for element `index` of a batch rooted at `seed`; order-independent.
[[nodiscard]] constexpr std::uint64_t child_seed(std::uint64_t seed,
                                                 std::uint64_t index) noexcept {
  return mix64(seed + (index + 1) * kGoldenGamma);
}

class Rng {
 public:
  explicit constexpr Rng(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t next_u64() noexcept { return mix64(state_ += kGoldenGamma); }

  /// Uniform on [0, 1), 53-bit resolution.
  double next_double() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform on (0, 1]; safe as a log() argument.
  double next_double_pos() noexcept {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard-normal pair via Box-Muller; consumes exactly two uniforms:
  /// r = sqrt(-2 ln u1), z0 = r cos(2*pi*u2), z1 = r sin(2*pi*u2).
  void normal_pair(double& z0, double& z1) noexcept {
    const double u1 = next_double_pos();
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    z0 = r * std::cos(t);
    z1 = r * std::sin(t);
  }

  /// Single standard normal; draws a pair and discards the second element.
  double normal() noexcept {
    double a, b;
    normal_pair(a, b);
    return a;
  }

  /// Poisson(mean) by inversion (sequential search on one uniform).
  /// Intended for small means (the region/feature rates used here).
  std::uint32_t poisson(double mean) noexcept {
    const double u = next_double();
    double p = std::exp(-mean);
    double cum = p;
    std::uint32_t k = 0;
    while (u >= cum && k < 10'000'000u) {
      ++k;
      p *= mean / static_cast<double>(k);
      cum += p;
    }
    return k;
  }

 private:
  std::uint64_t state_;
};

}  // namespace pareidolia
