#pragma once

#include <cstdint>

namespace polaron {

// Counter-based random numbers. Every draw is a pure function of
// (master seed, stream key, counter), so simulations are bit-reproducible
// under any parallel schedule: clones, sweeps and bonds key their own
// streams and never share mutable generator state.
namespace rng {

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t combine(std::uint64_t a, std::uint64_t b) {
  return mix64(a ^ (0x632be59bd9b4e019ull + (b * 0x9e3779b97f4a7c15ull)));
}

}  // namespace rng

// A small stateful view over a counter stream: construct from any number of
// key words, then draw sequentially.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}
  CounterRng(std::uint64_t k0, std::uint64_t k1) : key_(rng::combine(k0, k1)) {}
  CounterRng(std::uint64_t k0, std::uint64_t k1, std::uint64_t k2)
      : key_(rng::combine(rng::combine(k0, k1), k2)) {}
  CounterRng(std::uint64_t k0, std::uint64_t k1, std::uint64_t k2, std::uint64_t k3)
      : key_(rng::combine(rng::combine(rng::combine(k0, k1), k2), k3)) {}

  std::uint64_t next_u64() { return rng::mix64(key_ ^ (0x9e3779b97f4a7c15ull * ++ctr_)); }

  // Uniform in [0,1).
  double u01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [a,b).
  double uniform(double a, double b) { return a + (b - a) * u01(); }

  bool bernoulli(double p) { return u01() < p; }

  // Uniform integer in [0,n).
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

 private:
  std::uint64_t key_;
  std::uint64_t ctr_ = 0;
};

}  // namespace polaron
