#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace ordgen {

// Seeded random source. All draws are built directly on the mt19937_64
// stream (which is fully specified by the standard), so a given seed
// produces the same sequence on every platform and run.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // [0, 1) with 53 bits of resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // [0, n). Modulo reduction; bias is negligible for the small n used here.
  size_t below(size_t n) { return n <= 1 ? 0 : static_cast<size_t>(engine_() % n); }

  // Inclusive [lo, hi].
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(below(static_cast<size_t>(hi - lo + 1)));
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Fisher-Yates using below(); deterministic for a given seed.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

  // Seed material for a derived stream.
  uint64_t fork() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ordgen
