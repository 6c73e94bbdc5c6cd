#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace splat {

// splitmix64 step, used to hash seeds and derive independent streams.
inline uint64_t mix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Deterministic sub-seed for the tag-th child stream of a master seed.
inline uint64_t derive_seed(uint64_t seed, uint64_t tag) {
  return mix64(mix64(seed) ^ mix64(tag ^ 0x5851f42d4c957f2dull));
}

// Thin wrapper over mt19937_64. The standard fixes the engine's bit stream
// but not the library distributions, so uniforms are built from raw bits to
// keep seeded results identical across toolchains.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t bits() { return gen_(); }

  // uniform on the open interval (0,1); never returns 0 or 1
  double open_unit() { return (double)((bits() >> 11) + 0.5) * 0x1.0p-53; }

  // uniform on [0,1)
  double unit() { return (double)(bits() >> 11) * 0x1.0p-53; }

  // uniform integer in [0,n), n >= 1; rejection sampling, no modulo bias
  uint64_t below(uint64_t n) {
    uint64_t threshold = -n % n;  // == (2^64 - n) mod n
    for (;;) {
      uint64_t r = bits();
      if (r >= threshold) return r % n;
    }
  }

  bool coin() { return (bits() >> 63) != 0; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = (size_t)below(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace splat
