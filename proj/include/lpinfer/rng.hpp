#pragma once

#include "lpinfer/types.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>

namespace lpinfer {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of the k-th child of a master seed.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t k) {
  return mix64(master ^ mix64(k + 0x632BE59BD9B4E019ULL));
}

/// Counter-based stream keyed by (seed, replicate). The k-th 64-bit output is
/// mix64(key + (k + 1) * golden), so a replicate's values never depend on how
/// many other replicates ran before it or on which thread.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t replicate) : key_(derive_seed(seed, replicate)) {}

  std::uint64_t next() { return mix64(key_ + (++counter_) * 0x9E3779B97F4A7C15ULL); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform index in [0, n).
  Index index(Index n) {
    const auto k = static_cast<Index>(uniform() * static_cast<double>(n));
    return k < n ? k : n - 1;
  }

  /// Standard normal, Box-Muller cosine branch (two uniforms per call).
  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace lpinfer
