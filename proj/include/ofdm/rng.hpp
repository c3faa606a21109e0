#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <string_view>

namespace ofdm {

std::uint64_t splitmix64(std::uint64_t x);

// Stable seed mixing: folds each part into the state with splitmix64.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> parts);

// 64-bit FNV-1a, used to turn family names into seed parts.
std::uint64_t fnv1a(std::string_view s);

// All library randomness goes through this wrapper so the sampling
// procedures are pinned down independently of standard-library distribution
// implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  // Inverse-CDF draw. Falls back to the last positive entry when rounding
  // leaves the uniform above the accumulated mass.
  std::size_t categorical(std::span<const double> probs);

  // Uniform integer in [0, k).
  std::size_t below(std::size_t k);

 private:
  std::mt19937_64 engine_;
};

}  // namespace ofdm
