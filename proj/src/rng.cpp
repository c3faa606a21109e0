#include "ofdm/rng.hpp"

#include "ofdm/error.hpp"

namespace ofdm {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> parts) {
  std::uint64_t state = splitmix64(master);
  for (std::uint64_t p : parts) state = splitmix64(state ^ splitmix64(p));
  return state;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::size_t Rng::categorical(std::span<const double> probs) {
  if (probs.empty()) throw ConfigError("categorical: empty distribution");
  const double u = uniform();
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] > 0.0) {
      last_positive = i;
      acc += probs[i];
      if (u < acc) return i;
    }
  }
  return last_positive;
}

std::size_t Rng::below(std::size_t k) {
  if (k == 0) throw ConfigError("below: empty range");
  return static_cast<std::size_t>(uniform() * static_cast<double>(k)) % k;
}

}  // namespace ofdm
