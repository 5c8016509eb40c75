#ifndef DYNPRIV_RANDOM_HPP
#define DYNPRIV_RANDOM_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace dynpriv {

// std::uniform_real_distribution and std::normal_distribution are
// implementation-defined; these draw directly from the 64-bit engine so that a
// seed reproduces the same numbers on every standard library.
using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

/// Derives an independent sub-seed for a named stream (splitmix64 finalizer).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Uniform double in [0, 1).
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

/// +1 or -1 with equal probability.
inline double random_sign(Rng& rng) { return (rng() >> 63) != 0 ? 1.0 : -1.0; }

/// Box-Muller; one of the pair is discarded to keep the stream stateless.
inline double gaussian(Rng& rng, double mean, double stddev) {
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return mean + stddev * std::sqrt(-2.0 * std::log(u1)) *
                    std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace dynpriv

#endif  // DYNPRIV_RANDOM_HPP
