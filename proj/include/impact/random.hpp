#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace impact {

using Rng = std::mt19937_64;

/// Derives a child seed from a master seed and a stage name. Distinct names
/// give statistically independent streams, so adding a stage never shifts
/// the draws of another.
std::uint64_t substream_seed(std::uint64_t master, std::string_view stage);

inline Rng make_rng(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  return Rng(seq);
}

}  // namespace impact
