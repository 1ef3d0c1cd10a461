#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "dszog/core.hpp"

namespace dszog {

using Rng = std::mt19937_64;

/// Independent, reproducible generator for one purpose of one run.
/// Different `stream` values give unrelated sequences for the same seed.
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

/// k distinct indices from [0, n), uniformly, returned in ascending order
/// (Floyd's algorithm). Requires k <= n.
std::vector<Index> sample_without_replacement(Index n, Index k, Rng& rng);

}  // namespace dszog
