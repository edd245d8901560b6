#include "scalenas/rng.hpp"

#include <cmath>

namespace scalenas {

std::uint64_t Rng::uniform_u64(std::uint64_t n) {
  if (n <= 1) return 0;
  // Rejection sampling on the largest multiple of n below 2^64.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t v;
  do {
    v = next_u64();
  } while (v >= limit);
  return v % n;
}

double Rng::normal() {
  // Box-Muller; u1 in (0,1] so log() is finite.
  const double u1 = 1.0 - uniform01();
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

Rng Rng::child(std::uint64_t tag) const {
  std::uint64_t h = hash_combine(state_ ^ 0xa0761d6478bd642fULL, tag);
  return Rng(h);
}

std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
  // FNV-1a over the 8 bytes of v.
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xffULL;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace scalenas
