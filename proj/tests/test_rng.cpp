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

#include <gtest/gtest.h>

#include <random>
#include <set>

#include "powr/rng.hpp"

namespace powr {
namespace {

TEST(CounterRng, SameKeyAndStreamReproduce) {
  CounterRng a(42, 3), b(42, 3);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
}

TEST(CounterRng, StreamsDiffer) {
  CounterRng a(42, 0), b(42, 1);
  int equal = 0;
  for (int i = 0; i < 100; ++i) equal += a() == b();
  EXPECT_EQ(equal, 0);
}

TEST(CounterRng, UniformMomentsAndBelowRange) {
  CounterRng rng(7);
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sq += u * u;
  }
  EXPECT_NEAR(sum / n, 0.5, 0.005);
  EXPECT_NEAR(sq / n - (sum / n) * (sum / n), 1.0 / 12.0, 0.002);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const auto v = rng.below(7);
    ASSERT_LT(v, 7u);
    seen.insert(v);
  }
  EXPECT_EQ(seen.size(), 7u);
}

TEST(CounterRng, WorksWithStdDistributions) {
  CounterRng rng(1);
  std::normal_distribution<double> normal(0.0, 1.0);
  double s = 0.0;
  for (int i = 0; i < 10000; ++i) s += normal(rng);
  EXPECT_NEAR(s / 10000.0, 0.0, 0.05);
}

TEST(SampleCategorical, MatchesProbabilities) {
  CounterRng rng(11);
  const std::vector<double> p{0.2, 0.5, 0.3};
  std::vector<int> counts(3, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(sample_categorical(p, rng))];
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(counts[i] / double(n), p[i], 0.01);
}

}  // namespace
}  // namespace powr
