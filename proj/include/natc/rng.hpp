#pragma once

#include <cstdint>
#include <random>

namespace natc {

// Thin wrapper around mt19937_64 with hand-rolled distributions so that a
// given seed produces the same stream on every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  // uniform integer in [0, n), rejection-sampled to avoid modulo bias
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = gen_();
    } while (x >= limit);
    return x % n;
  }

 private:
  std::mt19937_64 gen_;
};

// Mixes independent seed components into one RNG seed.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0) {
  std::uint64_t h = a * 0x9e3779b97f4a7c15ULL;
  h ^= (b + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
  h *= 0xbf58476d1ce4e5b9ULL;
  h ^= (c + 0x94d049bb133111ebULL + (h << 6) + (h >> 2));
  h ^= h >> 31;
  return h;
}

}  // namespace natc
