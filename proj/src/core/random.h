#pragma once

#include <cstdint>
#include <random>

namespace entailre {

// std::mt19937_64 and std::seed_seq have fully specified output sequences;
// the standard distributions do not, so bounded draws are done here.
inline std::uint64_t UniformBelow(std::mt19937_64 &rng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

// Independent stream for one (seed, index) pair.
inline std::mt19937_64 DerivedStream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace entailre
