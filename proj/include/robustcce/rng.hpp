// Copyright 2026 The RobustCCE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ROBUSTCCE_RNG_HPP_
#define ROBUSTCCE_RNG_HPP_

#include <cstdint>

namespace robustcce {

// Portable deterministic PRNG: xorshift64* (shifts 12/25/27, multiplier
// 0x2545F4914F6CDD1D), seeded through one round of splitmix64 so that any
// 64-bit seed (including 0) yields a valid nonzero state. Identical seeds
// produce identical streams on every platform; nothing here depends on
// std::random implementation details.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(splitmix64(seed)) {
    if (state_ == 0) state_ = 0x9E3779B97F4A7C15ULL;
  }

  uint64_t next_u64() {
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * 0x2545F4914F6CDD1DULL;
  }

  // Uniform in [0, 1), 53-bit resolution.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Uniform integer in {0, .., n-1}; n must be positive.
  int next_int(int n) {
    int v = static_cast<int>(next_double() * n);
    return v < n ? v : n - 1;
  }

  // Samples an index from a probability vector by inverse CDF. Assumes p is
  // nonnegative and sums to ~1; rounding slack falls on the last index.
  template <typename Vec>
  int sample(const Vec& p) {
    const double u = next_double();
    double acc = 0.0;
    const int n = static_cast<int>(p.size());
    for (int a = 0; a < n; ++a) {
      acc += p[a];
      if (u < acc) return a;
    }
    return n - 1;
  }

  // Deterministic derived seed for substream `id` (seed-parallel workers,
  // per-probe estimators, ...). Derivation is order-independent.
  static uint64_t derive(uint64_t seed, uint64_t id) {
    return splitmix64(seed + 0x9E3779B97F4A7C15ULL * (id + 1));
  }

 private:
  static uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  }

  uint64_t state_;
};

}  // namespace robustcce

#endif  // ROBUSTCCE_RNG_HPP_
