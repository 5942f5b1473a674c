#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace vqbench {

// splitmix64 finalizer; used both as a bit mixer and to expand seeds.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_word(std::uint64_t key, std::uint64_t value) {
  return mix64(key ^ mix64(value));
}

inline std::uint64_t hash_word(std::uint64_t key, std::string_view text) {
  // FNV-1a folded into the running key.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h = (h ^ c) * 0x100000001b3ULL;
  }
  return mix64(key ^ h);
}

// Derives an independent substream seed from a base seed and a sequence of
// integer/string labels. Every stochastic component takes one of these
// instead of sharing a generator, so adding a consumer never perturbs
// another consumer's draws.
template <typename... Parts>
std::uint64_t derive_stream(std::uint64_t base, const Parts&... parts) {
  std::uint64_t key = mix64(base);
  ((key = hash_word(key, parts)), ...);
  return key;
}

// Seedable 64-bit generator handed around explicitly.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

  std::uint64_t next_u64() { return engine_(); }

  double uniform() {
    return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
  }

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }

  // Inclusive range.
  int uniform_int(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(engine_);
  }

  double normal(double mean, double stddev) {
    return std::normal_distribution<double>(mean, stddev)(engine_);
  }

  bool bernoulli(double p) {
    return uniform() < p;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace vqbench
