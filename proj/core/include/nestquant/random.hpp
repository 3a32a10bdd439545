#pragma once

#include <cstdint>
#include <random>

namespace nestquant {

using Rng = std::mt19937_64;

// Independent, reproducible stream for (seed, stream id). Used to give every
// Monte Carlo chunk or matrix row its own generator so that output does not
// depend on scheduling.
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32), 0x6e51u};
  return Rng(seq);
}

}  // namespace nestquant
