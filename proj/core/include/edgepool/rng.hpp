#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace edgepool {

using Rng = std::mt19937_64;

/// Derives an independent stream seed from a parent seed and a fixed label.
/// Adding a new labelled consumer never perturbs existing streams.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label);
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label, std::uint64_t index);

inline Rng make_rng(std::uint64_t seed, std::string_view label) {
  return Rng(derive_seed(seed, label));
}

inline Rng make_rng(std::uint64_t seed, std::string_view label, std::uint64_t index) {
  return Rng(derive_seed(seed, label, index));
}

} // namespace edgepool
