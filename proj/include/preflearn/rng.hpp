#pragma once

// Counter-based random generator. Every draw is a pure function of
// (seed, instance, tag, t, counter), so independent streams can be consumed
// in any order and from any thread without changing the numbers. Mixing is
// the SplitMix64 finalizer applied to a keyed counter.

#include <cmath>
#include <cstdint>

namespace preflearn {

namespace rng_tag {
inline constexpr std::uint64_t kThetaTrue = 1;
inline constexpr std::uint64_t kQuadDiag = 2;
inline constexpr std::uint64_t kPrices = 3;
inline constexpr std::uint64_t kBudget = 4;
inline constexpr std::uint64_t kRows = 5;
inline constexpr std::uint64_t kRhs = 6;
inline constexpr std::uint64_t kNoise = 7;
inline constexpr std::uint64_t kSubopt = 8;
inline constexpr std::uint64_t kTest = 100;
}  // namespace rng_tag

class StreamRng {
 public:
  StreamRng(std::uint64_t seed, std::uint64_t instance, std::uint64_t tag,
            std::uint64_t t = 0)
      : key_(mix(mix(mix(mix(seed + 0x9e3779b97f4a7c15ULL) ^ instance) ^
                     (tag * 0xbf58476d1ce4e5b9ULL)) ^
                 (t * 0x94d049bb133111ebULL))) {}

  std::uint64_t next_u64() {
    std::uint64_t z = key_ + (++ctr_) * 0x9e3779b97f4a7c15ULL;
    return mix(z);
  }

  // Uniform double in [lo, hi) with 53-bit resolution.
  double uniform(double lo, double hi) {
    const double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
  }

  // Uniform integer in [lo, hi], both ends inclusive.
  int uniform_int(int lo, int hi) {
    const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % range;
    std::uint64_t u;
    do {
      u = next_u64();
    } while (u >= limit);
    return lo + static_cast<int>(u % range);
  }

  // Standard exponential via inverse CDF (used for feasible-point sampling).
  double exponential() {
    double u;
    do {
      u = uniform(0.0, 1.0);
    } while (u <= 0.0);
    return -std::log(u);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t ctr_ = 0;
};

}  // namespace preflearn
