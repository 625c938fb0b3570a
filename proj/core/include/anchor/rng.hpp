#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "anchor/gaussian.hpp"

namespace anchor {

// Deterministic sampling built on mt19937_64 (fully specified by the
// standard) with explicit transforms instead of std::*_distribution, whose
// output is implementation-defined.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  // Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
  }

  double normal() { return norm_quantile(uniform()); }

  // Uniform integer in [0, n). Modulo bias is irrelevant at our scales and
  // keeps the draw sequence platform-stable.
  uint64_t below(uint64_t n) { return gen_() % n; }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::mt19937_64 gen_;
};

// splitmix64 finalizer; used to derive independent stream seeds.
inline uint64_t mix_seed(uint64_t a, uint64_t b) {
  uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace anchor
