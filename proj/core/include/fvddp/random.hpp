#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace fvddp {

using Rng = std::mt19937_64;

/// Independent stream for worker/replicate `stream` under a master seed.
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream, std::uint64_t tag = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    static_cast<std::uint32_t>(tag)};
  return Rng(seq);
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

}  // namespace fvddp
