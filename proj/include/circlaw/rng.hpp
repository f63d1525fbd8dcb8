#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace circlaw {

/// SplitMix64 output function. Every seed in the project is derived through
/// this mixer so that results are reproducible across languages:
///   z  = x + 0x9E3779B97F4A7C15
///   z  = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z  = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   out = z ^ (z >> 31)
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  std::uint64_t z = x + 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// mix(h, v) = splitmix64(h ^ splitmix64(v)); fold left over a key tuple.
constexpr std::uint64_t mix(std::uint64_t h, std::uint64_t v) noexcept {
  return splitmix64(h ^ splitmix64(v));
}

template <typename... Rest>
constexpr std::uint64_t mix(std::uint64_t h, std::uint64_t v, Rest... rest) noexcept {
  return mix(mix(h, v), static_cast<std::uint64_t>(rest)...);
}

/// 64-bit FNV-1a, used to turn experiment tags into seed material.
constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Stream identifiers keep independent draws of one entry apart.
inline constexpr std::uint64_t kStreamValue = 1;
inline constexpr std::uint64_t kStreamMask = 2;
inline constexpr std::uint64_t kStreamWalk = 3;
inline constexpr std::uint64_t kStreamMoment = 4;
inline constexpr std::uint64_t kStreamAux = 5;

/// Counter-based generator: the state is a key plus a counter, so any
/// (seed, stream, row, col) cell can be regenerated without replaying others.
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t key) noexcept : key_(key) {}
  CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t a, std::uint64_t b = 0) noexcept
      : key_(mix(seed, stream, a, b)) {}

  std::uint64_t next_u64() noexcept { return splitmix64(key_ + 0x9E3779B97F4A7C15ULL * ++counter_); }

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  /// Standard normal via Box-Muller (one draw per call, second value discarded).
  double normal() noexcept {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  bool bernoulli(double p) noexcept { return uniform() < p; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace circlaw
