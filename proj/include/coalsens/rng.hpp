#pragma once

#include <cstdint>
#include <random>

#include "coalsens/subset.hpp"

namespace coalsens::rng {

/// SplitMix64 finalizer: a bijection on 64-bit words.
inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Purpose tag of a derived child stream.
enum class Stream : std::uint64_t {
  Outer = 1,      // outer conditioning points x_A^(j)
  Inner = 2,      // inner conditional draws at one outer point
  Reference = 3,  // marginal reference sample (MMD)
  Joint = 4,      // plain joint sampling (A = D paths)
};

/// Child-seed derivation. The (purpose, subset, replicate) triple is packed
/// into disjoint bit ranges (4 + 24 + 36 bits), which makes the packing
/// injective for subset < 2^24 and replicate < 2^36; the SplitMix64
/// finalizer is a bijection, so distinct triples under one master seed can
/// never collide. Results are therefore independent of thread scheduling.
inline std::uint64_t derive_seed(std::uint64_t master, Stream purpose,
                                 SubsetMask subset, std::uint64_t replicate) {
  const std::uint64_t key = (static_cast<std::uint64_t>(purpose) << 60) |
                            (static_cast<std::uint64_t>(subset) << 36) | replicate;
  return splitmix64(splitmix64(master) ^ splitmix64(key));
}

/// Inverse standard-normal CDF (Wichura's AS241 rational approximations,
/// accurate to full double precision away from the extreme tails).
double normal_quantile(double p);

/// Standard-normal CDF via erfc.
double normal_cdf(double x);

/// Deterministic per-stream generator. Draws are reproducible given the seed
/// alone; no global state.
class Generator {
 public:
  explicit Generator(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on the open interval (0, 1), from the top 53 bits.
  double uniform01() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via the inverse CDF (no rejection, fixed draw count).
  double normal() { return normal_quantile(uniform01()); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace coalsens::rng
