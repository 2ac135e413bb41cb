#pragma once

#include <cstdint>
#include <random>

namespace dvlalign {

using Rng = std::mt19937_64;

/// Independent substreams of one trajectory seed.
enum class Stream : std::uint32_t {
  kTrajectory = 1,
  kMisalignment = 2,
  kImuNoise = 3,
  kDvlNoise = 4,
  kInit = 5,
  kShuffle = 6,
};

inline Rng make_rng(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return Rng(seq);
}

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace dvlalign
