#pragma once

#include <cstdint>
#include <random>

namespace iar {

// std::mt19937_64 fixes its output sequence for a given seed, but the standard
// distributions do not. The helpers below map engine output to values with a
// fixed algorithm so that sample draws are identical across toolchains.

/// Uniform integer in [0, bound) by rejection sampling; bound >= 1.
std::uint64_t uniform_index(std::mt19937_64& engine, std::uint64_t bound);

/// Uniform double in [0, 1) from the top 53 bits of one engine output.
double uniform_real(std::mt19937_64& engine);

/// Standard normal via Box-Muller; consumes exactly two engine outputs.
double standard_normal(std::mt19937_64& engine);

}  // namespace iar
