#pragma once

#include <cstdint>
#include <limits>

namespace jlsketch {

struct Seed {
  std::uint64_t value = 0;

  constexpr Seed() = default;
  constexpr explicit Seed(std::uint64_t v) : value(v) {}
  constexpr bool operator==(const Seed&) const = default;
};

/// SplitMix64 finalizer. A bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Child seed for stream `index` under `root`:
///
///     derive_seed(root, i) = mix64(mix64(root) + 0x9e3779b97f4a7c15 * (i + 1))   (mod 2^64)
///
/// For a fixed root the map i -> derive_seed(root, i) is a bijection (odd multiplier, then a
/// bijective finalizer), so distinct indices never collide.
constexpr Seed derive_seed(Seed root, std::uint64_t index) noexcept {
  return Seed{mix64(mix64(root.value) + 0x9e3779b97f4a7c15ULL * (index + 1))};
}

/// xoshiro256** seeded by four successive SplitMix64 outputs of the seed value.
///
/// Satisfies UniformRandomBitGenerator, but the samplers in this library only use the
/// hand-written helpers below so that draws are identical on every platform.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(Seed seed) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept { return next(); }

  std::uint64_t next() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform integer on [0, bound) by Lemire's multiply-and-reject method. bound > 0.
  std::uint64_t bounded(std::uint64_t bound) noexcept;

  /// Standard normal by the Marsaglia polar method. Draws come in pairs; the second of each
  /// pair is cached and returned by the next call.
  double normal() noexcept;

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

  std::uint64_t s_[4];
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

/// Fair signs drawn 64 at a time from one generator word, least significant bit first.
/// A set bit means -1.
class SignStream {
 public:
  explicit SignStream(Rng& rng) noexcept : rng_(rng) {}

  bool negative() noexcept {
    if (remaining_ == 0) {
      word_ = rng_.next();
      remaining_ = 64;
    }
    const bool bit = (word_ & 1U) != 0;
    word_ >>= 1;
    --remaining_;
    return bit;
  }

 private:
  Rng& rng_;
  std::uint64_t word_ = 0;
  int remaining_ = 0;
};

}  // namespace jlsketch
