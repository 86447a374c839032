#pragma once

#include "ssgd/common.hpp"

#include <cstdint>
#include <random>

namespace ssgd {

/// Seedable generator used everywhere randomness is needed.
///
/// The engine is std::mt19937_64. A run seeded with `seed` draws from
/// `Rng(seed)`; trial `k` of a sweep draws from `Rng(seed).substream(k)`,
/// whose seed is splitmix64(seed ^ splitmix64(k + 1)). Substreams therefore
/// depend only on (seed, k), never on how many draws the parent made, so
/// sweeps can be run in any order or in parallel and still reproduce.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }
  Rng substream(std::uint64_t index) const;

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
  /// Uniform integer in [0, n).
  int index(int n) { return std::uniform_int_distribution<int>(0, n - 1)(engine_); }
  /// +1 or -1 with equal probability.
  double sign() { return (engine_() >> 63) != 0 ? 1.0 : -1.0; }

  Vector gaussian(Eigen::Index n);
  Matrix gaussian(Eigen::Index rows, Eigen::Index cols);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace ssgd
