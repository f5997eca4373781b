#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace coevogan {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent engine seed from (master, stream, index); used to give every
// grid cell and every run-level consumer its own stream.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                 std::uint64_t index = 0) {
  return splitmix64(master ^ splitmix64(stream ^ splitmix64(index)));
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double standard_normal(Rng& rng) {
  return std::normal_distribution<double>(0.0, 1.0)(rng);
}

// Cumulative-walk categorical draw. Probabilities must sum to ~1; the last
// bucket absorbs rounding slack.
inline int pick_weighted(std::span<const double> probabilities, Rng& rng) {
  const double u = uniform01(rng);
  double cum = 0.0;
  for (std::size_t i = 0; i + 1 < probabilities.size(); ++i) {
    cum += probabilities[i];
    if (u < cum) return static_cast<int>(i);
  }
  return static_cast<int>(probabilities.size()) - 1;
}

}  // namespace coevogan
