/// Seeded randomness for the whole library.
///
/// Every random quantity flows from one root seed. Subsystems draw from
/// derived streams: stream_seed(root, tag, index) mixes the root seed with a
/// hash of the subsystem tag and a stream index, so e.g. SA restart r uses
/// stream_seed(seed, "sa.restart", r) and never collides with the SBM
/// sampler. Draw helpers avoid std::uniform_*_distribution so results are
/// identical across standard libraries.
#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace qpan {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Derives the seed of a named sub-stream from the root seed.
inline std::uint64_t stream_seed(std::uint64_t root, std::string_view tag,
                                 std::uint64_t index = 0) {
  return splitmix64(splitmix64(root ^ fnv1a(tag)) ^ index);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  Rng(std::uint64_t root, std::string_view tag, std::uint64_t index = 0)
      : gen_(stream_seed(root, tag, index)) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform double in [0, 1), 53-bit resolution.
  double next_double() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  bool next_bool() { return (gen_() >> 63) != 0; }

  bool bernoulli(double p) { return next_double() < p; }

  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t next_below(std::uint64_t bound) {
    // Rejection-free multiply-shift; bias is negligible for bound << 2^64
    // but we keep the rejection loop so small bounds are exact.
    std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      std::uint64_t r = gen_();
      if (r >= threshold) return r % bound;
    }
  }

  int next_int(int lo, int hi_inclusive) {
    return lo + static_cast<int>(next_below(
                    static_cast<std::uint64_t>(hi_inclusive - lo + 1)));
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace qpan
