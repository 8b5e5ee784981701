// Copyright 2026 The docfuzz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "docfuzz/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

namespace docfuzz {
namespace {

TEST(RngTest, SameSeedSameStream) {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    std::uint64_t x = a.Next();
    EXPECT_EQ(x, b.Next());
    differs = differs || x != c.Next();
  }
  EXPECT_TRUE(differs);
}

TEST(RngTest, ReferenceOutputIsPinned) {
  // Guards cross-platform stability of recorded campaigns.
  // xoshiro256** seeded by splitmix64(0), computed independently.
  Rng r(0);
  EXPECT_EQ(r.Next(), 0x99ec5f36cb75f2b4ULL);
  EXPECT_EQ(r.Next(), 0xbf6e1f784956452aULL);
  EXPECT_EQ(r.Next(), 0x1a5f849d4933e6e0ULL);
}

TEST(RngTest, BelowStaysInRange) {
  Rng r(7);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    auto v = r.Below(6);
    ASSERT_LT(v, 6u);
    seen.insert(v);
  }
  EXPECT_EQ(seen.size(), 6u);
  EXPECT_EQ(r.Below(0), 0u);
  EXPECT_EQ(r.Below(1), 0u);
}

TEST(RngTest, RangeIsInclusive) {
  Rng r(9);
  bool lo = false, hi = false;
  for (int i = 0; i < 1000; ++i) {
    auto v = r.Range(-2, 2);
    ASSERT_GE(v, -2);
    ASSERT_LE(v, 2);
    lo = lo || v == -2;
    hi = hi || v == 2;
  }
  EXPECT_TRUE(lo && hi);
  EXPECT_EQ(r.Range(5, 5), 5);
}

TEST(RngTest, UniformHalfOpen) {
  Rng r(11);
  for (int i = 0; i < 1000; ++i) {
    double u = r.Uniform(1.0, 1.0 + 1e-15);
    EXPECT_GE(u, 1.0);
    EXPECT_LT(u, 1.0 + 1e-15);
  }
}

TEST(RngTest, NormalMoments) {
  Rng r(3);
  const int n = 200000;
  double sum = 0, sq = 0;
  for (int i = 0; i < n; ++i) {
    double x = r.Normal();
    sum += x;
    sq += x * x;
  }
  double mean = sum / n;
  double var = sq / n - mean * mean;
  EXPECT_NEAR(mean, 0.0, 0.02);
  EXPECT_NEAR(var, 1.0, 0.02);
}

TEST(RngTest, StreamSeedsAreIndependentPerParameter) {
  auto a = DeriveStreamSeed(1, "api", 5, "src");
  EXPECT_EQ(a, DeriveStreamSeed(1, "api", 5, "src"));
  EXPECT_NE(a, DeriveStreamSeed(1, "api", 5, "dst"));
  EXPECT_NE(a, DeriveStreamSeed(1, "api", 6, "src"));
  EXPECT_NE(a, DeriveStreamSeed(2, "api", 5, "src"));
  EXPECT_NE(a, DeriveStreamSeed(1, "apix", 5, "src"));
  // The separator keeps "ab"+"c" distinct from "a"+"bc".
  EXPECT_NE(DeriveStreamSeed(1, "ab", 0, "c"), DeriveStreamSeed(1, "a", 0, "bc"));
}

}  // namespace
}  // namespace docfuzz
