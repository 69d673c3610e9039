// Copyright 2026 The wsloc Authors
// SPDX-License-Identifier: Apache-2.0
//
// Counter-based seeding: every random stream is keyed by (seed, tag, ids...),
// so a frame's draws never depend on how many frames came before it or on
// which thread generated it.

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace wsloc {

inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// FNV-1a.
inline std::uint64_t hash_string(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t stream_key(std::uint64_t seed,
                                std::initializer_list<std::uint64_t> ids) {
  std::uint64_t k = mix64(seed);
  for (std::uint64_t id : ids) k = mix64(k ^ mix64(id));
  return k;
}

inline std::mt19937_64 make_stream(std::uint64_t seed,
                                   std::initializer_list<std::uint64_t> ids) {
  return std::mt19937_64(stream_key(seed, ids));
}

// The draws below are written out instead of using <random> distributions so
// that streams reproduce bit-for-bit across standard library implementations.

// Uniform in [0, 1).
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

// Uniform in [0, n); n must be positive.
inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  const auto i = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n));
  return i < n ? i : n - 1;
}

// Box-Muller, one variate per call.
inline double standard_normal(std::mt19937_64& rng) {
  const double u1 = 1.0 - uniform01(rng);  // (0, 1]
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

// Standard normal conditioned on |z| <= limit.
inline double truncated_normal(std::mt19937_64& rng, double limit) {
  for (;;) {
    const double z = standard_normal(rng);
    if (std::abs(z) <= limit) return z;
  }
}

inline std::int64_t poisson(std::mt19937_64& rng, double mean) {
  if (mean <= 0.0) return 0;
  if (mean > 30.0) {
    const double x = std::round(mean + std::sqrt(mean) * standard_normal(rng));
    return x < 0.0 ? 0 : static_cast<std::int64_t>(x);
  }
  const double limit = std::exp(-mean);
  std::int64_t k = 0;
  double p = uniform01(rng);
  while (p > limit) {
    ++k;
    p *= uniform01(rng);
  }
  return k;
}

}  // namespace wsloc
