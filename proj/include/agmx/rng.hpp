#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "agmx/core.hpp"

namespace agmx {

/// SplitMix64 stream. All constants live here so that other implementations
/// can reproduce the exact sequence:
///
///   state += 0x9E3779B97F4A7C15
///   z = state
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   return z ^ (z >> 31)
///
/// uniform() takes the top 53 bits: (z >> 11) * 2^-53, in [0, 1).
/// normal() is Box-Muller on (u1, u2) = (1 - uniform(), uniform()), returning
/// sqrt(-2 ln u1) cos(2 pi u2) and caching sqrt(-2 ln u1) sin(2 pi u2) for the
/// next call. bernoulli(p) is uniform() < p.
class Rng {
 public:
  static constexpr std::uint64_t kDefaultSeed = 42;
  static constexpr std::uint64_t kIncrement = 0x9E3779B97F4A7C15ULL;
  static constexpr std::uint64_t kMix1 = 0xBF58476D1CE4E5B9ULL;
  static constexpr std::uint64_t kMix2 = 0x94D049BB133111EBULL;

  explicit Rng(std::uint64_t seed = kDefaultSeed) : state_(seed) {}

  std::uint64_t next() {
    state_ += kIncrement;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * kMix1;
    z = (z ^ (z >> 27)) * kMix2;
    return z ^ (z >> 31);
  }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Independent child stream seeded from this one.
  Rng split() { return Rng(next()); }

  Vector uniform_vector(Index n) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = uniform();
    return v;
  }
  Vector normal_vector(Index n) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace agmx
