#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace gridins {

// SplitMix64 finalizer: bijective 64-bit mix with good avalanche.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

// Deterministic counter-addressed random stream.  A stream is identified by
// (seed, label, a, b); draws walk SplitMix64 from the mixed key.  Any worker
// that opens the same address observes the same sequence, which makes results
// independent of how work is split across threads.
class Substream {
 public:
  Substream(std::uint64_t seed, std::string_view label, std::uint64_t a = 0,
            std::uint64_t b = 0)
      : state_(mix64(mix64(mix64(seed ^ fnv1a64(label)) + a) + b)) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix64(state_);
  }

  // Uniform on the open interval (0,1); never returns 0 or 1 exactly.
  double next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  bool next_bernoulli(double p) { return next_uniform() < p; }

  double next_exponential(double rate) {
    return -std::log(next_uniform()) / rate;
  }

  // Standard normal via Box-Muller; always consumes exactly two uniforms.
  double next_normal() {
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.283185307179586476925286766559 * u2);
  }

 private:
  std::uint64_t state_;
};

}  // namespace gridins
