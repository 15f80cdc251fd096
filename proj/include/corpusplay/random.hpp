#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace corpusplay {

// mt19937_64 is fully specified by the standard. The standard distributions
// are not, so the helpers below pin the draw algorithms to keep streams
// identical across standard library implementations.
using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Order-sensitive combination of seed components.
std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts) noexcept;

// FNV-1a, 64 bit.
std::uint64_t hash_string(std::string_view s) noexcept;

inline Rng make_rng(std::uint64_t seed) { return Rng{seed}; }

// Uniform in [0, 1) with 53 bits of resolution.
double uniform01(Rng& rng);

// Uniform in [0, n); n must be positive.
std::size_t uniform_index(Rng& rng, std::size_t n);

bool bernoulli(Rng& rng, double p);

}  // namespace corpusplay
