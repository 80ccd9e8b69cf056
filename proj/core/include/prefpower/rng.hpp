#pragma once

#include <cstdint>
#include <string_view>

namespace prefpower {

// Counter-based PRNG (SplitMix64). Chosen over <random> engines because the
// standard distributions are implementation-defined: identical seeds must
// produce identical streams on every platform for the reproducibility
// contract to hold.
//
// Splittable streams: derive(seed, a, b, ...) folds each index through the
// SplitMix64 finalizer, so per-(pair, n, trial) generators are independent
// of evaluation order and of how work is scheduled across threads.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return next_double() < p; }

  // Uniform integer in [0, bound), unbiased via rejection. bound >= 1.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t threshold = (0ULL - bound) % bound;  // 2^64 mod bound
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

  // Number of successes in n Bernoulli(p) draws.
  std::int64_t binomial(std::int64_t n, double p) {
    std::int64_t k = 0;
    for (std::int64_t i = 0; i < n; ++i) k += bernoulli(p) ? 1 : 0;
    return k;
  }

  // Successes when drawing `draws` items without replacement from a pool of
  // `total` items containing `successes` successes.
  std::int64_t hypergeometric(std::int64_t total, std::int64_t successes, std::int64_t draws) {
    std::int64_t s = successes, t = total, k = 0;
    for (std::int64_t i = 0; i < draws; ++i) {
      if (bernoulli(static_cast<double>(s) / static_cast<double>(t))) {
        ++k;
        --s;
      }
      --t;
    }
    return k;
  }

 private:
  std::uint64_t state_;
};

namespace detail {
inline std::uint64_t splitmix_fold(std::uint64_t h, std::uint64_t v) {
  h += 0x9E3779B97F4A7C15ULL + v;
  h = (h ^ (h >> 30)) * 0xBF58476D1CE4E5B9ULL;
  h = (h ^ (h >> 27)) * 0x94D049BB133111EBULL;
  return h ^ (h >> 31);
}
}  // namespace detail

// Derived stream seed for (seed, indices...). Order-sensitive fold.
template <typename... Ts>
std::uint64_t derive_seed(std::uint64_t seed, Ts... indices) {
  std::uint64_t h = detail::splitmix_fold(0x5851F42D4C957F2DULL, seed);
  ((h = detail::splitmix_fold(h, static_cast<std::uint64_t>(indices))), ...);
  return h;
}

// FNV-1a 64-bit hash; used for content-derived stream ids and input digests.
inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace prefpower
