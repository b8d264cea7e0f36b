#pragma once

#include <cstdint>
#include <cstring>
#include <cmath>
#include <string_view>

namespace volscreen {

// 64-bit FNV-1a. Constants are pinned so fingerprints and config hashes are
// reproducible across platforms and runs.
inline constexpr std::uint64_t kFnvOffsetBasis = 14695981039346656037ull;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ull;

inline std::uint64_t fnv1a64(const void* data, std::size_t len,
                             std::uint64_t h = kFnvOffsetBasis) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= kFnvPrime;
  }
  return h;
}

inline std::uint64_t fnv1a64(std::string_view s,
                             std::uint64_t h = kFnvOffsetBasis) {
  return fnv1a64(s.data(), s.size(), h);
}

inline std::uint64_t fnv1a64_u64(std::uint64_t v,
                                 std::uint64_t h = kFnvOffsetBasis) {
  unsigned char bytes[8];
  std::memcpy(bytes, &v, 8);
  return fnv1a64(bytes, 8, h);
}

// SplitMix64 generator. Small state, full 64-bit output, and cheap keyed
// construction, which makes per-work-item streams independent of scheduling:
// Rng::keyed(master_seed, item_index) always yields the same stream no matter
// which thread picks the item up.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  static Rng keyed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t h = fnv1a64_u64(master);
    h = fnv1a64_u64(index, h);
    return Rng(h);
  }

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n). Rejection sampling keeps it unbiased and the
  // draw sequence deterministic.
  std::uint64_t uniform_int(std::uint64_t n) {
    if (n == 0) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return v % n;
  }

  // Standard normal via Box-Muller. The second value of the pair is discarded
  // so that every call consumes exactly two uniforms; no hidden cache state.
  double gaussian() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double gaussian(double mu, double sigma) { return mu + sigma * gaussian(); }

 private:
  std::uint64_t state_;
};

}  // namespace volscreen
