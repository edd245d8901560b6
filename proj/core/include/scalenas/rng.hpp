#pragma once

#include <cstdint>

namespace scalenas {

// Deterministic PRNG with hand-rolled distributions so that seeded runs are
// bit-identical across platforms and standard-library versions (checked-in
// golden files depend on this; std:: distributions are not portable).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {
    // Decorrelate small seeds.
    next_u64();
    next_u64();
  }

  std::uint64_t next_u64() {
    // SplitMix64 (Steele, Lea, Flood 2014).
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Unbiased integer in [0, n) via rejection on the top bits.
  std::uint64_t uniform_u64(std::uint64_t n);

  // Inclusive integer range.
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(uniform_u64(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  // [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  bool bernoulli(double p) { return uniform01() < p; }

  // Standard normal via Box-Muller; no cached spare, so the draw count per
  // call is fixed and replay never depends on call history.
  double normal();

  // Derive an independent child stream without advancing this generator.
  Rng child(std::uint64_t tag) const;

 private:
  std::uint64_t state_;
};

// Stateless hash of a byte-span-like key list onto one u64; used for
// seed-derived coefficient tables and replay-pure noise.
std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v);
constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;

}  // namespace scalenas
