// Copyright 2026 The MemAudit Authors
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


#include "memaudit/capacity.hpp"

#include <cmath>

#include <gtest/gtest.h>

namespace memaudit {
namespace {

TEST(CapacityTest, SmallCases) {
  EXPECT_DOUBLE_EQ(capacity_exact(1, 1024), 10.0);
  EXPECT_DOUBLE_EQ(capacity_exact(1023, 1024), 10.0);
  EXPECT_EQ(capacity_exact(0, 10), 0.0);
  EXPECT_EQ(capacity_exact(10, 10), 0.0);
  EXPECT_NEAR(capacity_exact(2, 4), std::log2(6.0), 1e-15);
  EXPECT_EQ(capacity_approx(0, 10), 0.0);
}

TEST(CapacityTest, LargeCase) {
  EXPECT_NEAR(capacity_exact(1000, 1000000), 11401.4496987378, 1e-6);
  EXPECT_NEAR(capacity_approx(1000, 1000000), 11408.4793255511, 1e-6);
}

TEST(CapacityTest, SummedAndLogGammaPathsAgree) {
  // k = 64 takes the summed path, k = 65 log-gamma; consecutive terms differ by log2((N-64)/65).
  const std::uint64_t N = 100000;
  const double step = capacity_exact(65, N) - capacity_exact(64, N);
  EXPECT_NEAR(step, std::log2(static_cast<double>(N - 64) / 65.0), 1e-8);
}

TEST(CapacityTest, ApproximationAccurateWhenSparse) {
  const std::uint64_t N = 1000000;
  for (std::uint64_t n = 100; n <= N / 100; n = n * 3 / 2) {
    const auto r = capacity_report(n, N);
    EXPECT_LT(r.rel_error, 0.05) << "n = " << n;
  }
}

TEST(CapacityTest, Crossovers) {
  // Frozen from an independent log-gamma bisection.
  const auto t1 = capacity_crossover(90000, 15000000);
  EXPECT_EQ(t1.n_star, 7223u);
  EXPECT_EQ(t1.n_star_2bits, 15897u);
  EXPECT_EQ(capacity_crossover(300000, 15000000).n_star, 28644u);
  EXPECT_EQ(capacity_crossover(2000000, 15000000).n_star, 278549u);
  EXPECT_EQ(capacity_crossover(12386, 100000).n_star, 1695u);
  EXPECT_EQ(capacity_crossover(12386, 100000).n_star_2bits, 4121u);
  EXPECT_EQ(capacity_crossover(10, 1024).n_star, 1u);
}

TEST(CapacityTest, CrossoverIsSmallestSufficient) {
  for (std::uint64_t params : {50u, 1000u, 12386u, 90000u}) {
    const auto c = capacity_crossover(params, 100000);
    EXPECT_GE(capacity_exact(c.n_star, 100000), params * (1.0 - 1e-12));
    EXPECT_LT(capacity_exact(c.n_star - 1, 100000), static_cast<double>(params));
  }
}

TEST(CapacityTest, Errors) {
  EXPECT_THROW(capacity_exact(5, 4), ArgumentError);
  EXPECT_THROW(capacity_exact(0, 0), ArgumentError);
  EXPECT_THROW(capacity_crossover(0, 100), ArgumentError);
  EXPECT_THROW(capacity_crossover(1000, 100), ArgumentError);  // C(50, 100) ~ 96 bits
  const auto c = capacity_crossover(60, 100);
  EXPECT_FALSE(c.two_bits_reachable);
  EXPECT_EQ(c.n_star_2bits, 50u);
}

}  // namespace
}  // namespace memaudit
