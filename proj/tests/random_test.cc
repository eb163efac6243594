// Copyright 2026 The Panofuse Authors.
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

#include "panofuse/random.h"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "gtest/gtest.h"

namespace panofuse {
namespace {

TEST(SplitMix64Test, ReferenceSequence) {
  // Published reference outputs for seed 0.
  SplitMix64 rng(0);
  EXPECT_EQ(rng.Next(), 0xE220A8397B1DCDAFULL);
  EXPECT_EQ(rng.Next(), 0x6E789E6AA1B965F4ULL);
  EXPECT_EQ(rng.Next(), 0x06C45D188009454FULL);
}

TEST(SplitMix64Test, RangesAndMoments) {
  SplitMix64 rng(2);
  double sum = 0, sum_sq = 0, gauss = 0, gauss_sq = 0;
  constexpr int kDraws = 200000;
  for (int i = 0; i < kDraws; ++i) {
    const double u = rng.Uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sum_sq += u * u;
    const uint64_t b = rng.Below(7);
    ASSERT_LT(b, 7u);
    const double g = rng.Gaussian();
    gauss += g;
    gauss_sq += g * g;
  }
  EXPECT_NEAR(sum / kDraws, 0.5, 0.005);
  EXPECT_NEAR(sum_sq / kDraws, 1.0 / 3.0, 0.005);
  EXPECT_NEAR(gauss / kDraws, 0.0, 0.01);
  EXPECT_NEAR(gauss_sq / kDraws, 1.0, 0.02);
}

TEST(SplitMix64Test, UniformIntIsInclusive) {
  SplitMix64 rng(3);
  std::set<int> seen;
  for (int i = 0; i < 1000; ++i) seen.insert(rng.UniformInt(-2, 2));
  EXPECT_EQ(seen, (std::set<int>{-2, -1, 0, 1, 2}));
  EXPECT_THROW(rng.UniformInt(3, 2), std::invalid_argument);
}

TEST(DeriveSeedTest, StreamsDiffer) {
  EXPECT_NE(DeriveSeed(1, 1), DeriveSeed(1, 2));
  EXPECT_NE(DeriveSeed(1, 1), DeriveSeed(2, 1));
  EXPECT_EQ(DeriveSeed(5, 9), DeriveSeed(5, 9));
}

TEST(SampleWithoutReplacementTest, SortedDistinctDeterministic) {
  for (int n = 0; n < 20; ++n) {
    for (int k = 0; k <= n; ++k) {
      const auto s = SampleWithoutReplacement(n, k, 77);
      ASSERT_EQ(static_cast<int>(s.size()), k);
      ASSERT_TRUE(std::is_sorted(s.begin(), s.end()));
      ASSERT_EQ(std::set<int>(s.begin(), s.end()).size(), s.size());
      for (int v : s) {
        ASSERT_GE(v, 0);
        ASSERT_LT(v, n);
      }
      ASSERT_EQ(s, SampleWithoutReplacement(n, k, 77));
    }
  }
  EXPECT_THROW(SampleWithoutReplacement(3, 4, 0), std::invalid_argument);
}

TEST(SampleWithoutReplacementTest, RoughlyUniform) {
  std::vector<int> hits(10, 0);
  for (uint64_t seed = 0; seed < 5000; ++seed) {
    for (int v : SampleWithoutReplacement(10, 3, seed)) ++hits[v];
  }
  for (int h : hits) EXPECT_NEAR(h, 1500, 150);
}

}  // namespace
}  // namespace panofuse
