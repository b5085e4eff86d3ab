#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace radnet::rng {

// Counter-based pseudo-random primitives. Every draw is a pure function of a
// 64-bit key, so sampling the i-th value never depends on how many values were
// drawn before it. That is what makes parallel and serial simulation emit
// bit-identical streams for the same seed.

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t mix(std::uint64_t h) noexcept { return splitmix64(h); }

template <class... Rest>
constexpr std::uint64_t mix(std::uint64_t h, std::uint64_t next, Rest... rest) noexcept {
  return mix(splitmix64(h ^ (next + 0x9e3779b97f4a7c15ULL)), rest...);
}

// Uniform in the open interval (0, 1); never returns 0 or 1 so log() is safe.
inline double u01(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1p-53;
}

inline double uniform(std::uint64_t key, double lo, double hi) noexcept {
  return lo + (hi - lo) * u01(splitmix64(key ^ 0x6a09e667f3bcc909ULL));
}

// Uniform integer in [0, n). n must be positive. The modulo bias is
// negligible for the n used here (well below 2^32).
inline std::uint64_t uniform_index(std::uint64_t key, std::uint64_t n) noexcept {
  return splitmix64(key ^ 0xbb67ae8584caa73bULL) % n;
}

inline double gaussian(std::uint64_t key) noexcept {
  const double u1 = u01(splitmix64(key ^ 0x3c6ef372fe94f82bULL));
  const double u2 = u01(splitmix64(key ^ 0xa54ff53a5f1d36f1ULL));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline double gaussian(std::uint64_t key, double mean, double stddev) noexcept {
  return mean + stddev * gaussian(key);
}

inline double exponential(std::uint64_t key, double rate) noexcept {
  return -std::log(u01(splitmix64(key ^ 0x510e527fade682d1ULL))) / rate;
}

}  // namespace radnet::rng
