// Copyright 2026 The POWR Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <limits>

namespace powr {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based 64-bit generator. Output i of stream (key, stream) is a
/// pure function of (key, stream, i), so independent streams can be handed
/// to independent threads and any draw can be reproduced from its index.
///
/// Satisfies UniformRandomBitGenerator, so it plugs into <random>
/// distributions as well.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key = 0, std::uint64_t stream = 0) noexcept
      : key_(mix64(key) ^ mix64(stream * 0xd1b54a32d192ed03ULL + 1)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    return mix64(key_ + mix64(counter_++));
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) noexcept {
    return lo + (hi - lo) * uniform();
  }

  /// Uniform integer in [0, n). Lemire's multiply-shift with rejection.
  std::uint64_t below(std::uint64_t n) noexcept {
    if (n == 0) return 0;
    for (;;) {
      const auto x = (*this)();
      const auto m = static_cast<unsigned __int128>(x) * n;
      const auto lo = static_cast<std::uint64_t>(m);
      if (lo >= n || lo >= (-n) % n) {
        return static_cast<std::uint64_t>(m >> 64);
      }
    }
  }

  std::uint64_t counter() const noexcept { return counter_; }

  /// Derive an independent child stream.
  CounterRng split(std::uint64_t stream) const noexcept {
    CounterRng child;
    child.key_ = mix64(key_ ^ mix64(stream + 0x632be59bd9b4e019ULL));
    return child;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Sample an index from a probability vector (any indexable container).
template <typename Probs>
int sample_categorical(const Probs& p, CounterRng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  const int n = static_cast<int>(p.size());
  for (int i = 0; i < n; ++i) {
    acc += p[i];
    if (u < acc) return i;
  }
  // u landed in the rounding slack above the last partial sum.
  for (int i = n - 1; i >= 0; --i) {
    if (p[i] > 0.0) return i;
  }
  return n - 1;
}

}  // namespace powr
