#include "iar/random.hpp"

#include <cmath>
#include <numbers>

namespace iar {

std::uint64_t uniform_index(std::mt19937_64& engine, std::uint64_t bound) {
  // Largest multiple of bound representable in 64 bits; reject above it.
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound + 1) % bound;
  std::uint64_t r = engine();
  while (r > limit) r = engine();
  return r % bound;
}

double uniform_real(std::mt19937_64& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

double standard_normal(std::mt19937_64& engine) {
  const double u1 = 1.0 - uniform_real(engine);  // (0, 1]
  const double u2 = uniform_real(engine);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace iar
