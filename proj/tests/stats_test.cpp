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

#include "memaudit/stats.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "gtest/gtest.h"
#include "test_util.hpp"

namespace memaudit {
namespace {

// O(n m (n + m)): evaluate both CDFs by direct counting at every sample.
double BruteForceKs(const std::vector<double>& a, const std::vector<double>& b) {
  auto cdf = [](const std::vector<double>& s, double x) {
    int c = 0;
    for (double v : s) c += v <= x ? 1 : 0;
    return static_cast<double>(c) / s.size();
  };
  double best = 0.0;
  for (const auto* s : {&a, &b}) {
    for (double x : *s) best = std::max(best, std::abs(cdf(a, x) - cdf(b, x)));
  }
  return best;
}

TEST(EmpiricalCdfTest, CountsWithMultiplicity) {
  EmpiricalCdf f({3.0, 1.0, 2.0, 2.0});
  EXPECT_DOUBLE_EQ(f(0.5), 0.0);
  EXPECT_DOUBLE_EQ(f(1.0), 0.25);
  EXPECT_DOUBLE_EQ(f(2.0), 0.75);
  EXPECT_DOUBLE_EQ(f.eval_left(2.0), 0.25);
  EXPECT_DOUBLE_EQ(f(10.0), 1.0);
  EXPECT_EQ(f.min(), 1.0);
  EXPECT_EQ(f.max(), 3.0);
}

TEST(EmpiricalCdfTest, RejectsEmptyAndNonFinite) {
  EXPECT_THROW(EmpiricalCdf({}), InputError);
  EXPECT_THROW(EmpiricalCdf({1.0, std::numeric_limits<double>::quiet_NaN()}), InputError);
  EXPECT_THROW(EmpiricalCdf({std::numeric_limits<double>::infinity()}), InputError);
}

TEST(KsDistanceTest, MatchesBruteForceOnRandomPairs) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> size(1, 30);
  for (int trial = 0; trial < 1000; ++trial) {
    auto a = trial % 2 ? testing::grid_sample(rng, size(rng)) : testing::uniform_sample(rng, size(rng));
    auto b = trial % 3 ? testing::grid_sample(rng, size(rng)) : testing::uniform_sample(rng, size(rng), 0.2, 1.2);
    const double d = ks_distance(EmpiricalCdf(a), EmpiricalCdf(b));
    EXPECT_NEAR(d, BruteForceKs(a, b), 1e-15) << "trial " << trial;
  }
}

TEST(KsDistanceTest, Properties) {
  const EmpiricalCdf a({0.1, 0.2, 0.3}), b({0.7, 0.8});
  EXPECT_DOUBLE_EQ(ks_distance(a, a), 0.0);
  EXPECT_DOUBLE_EQ(ks_distance(a, b), 1.0);
  EXPECT_DOUBLE_EQ(ks_distance(a, b), ks_distance(b, a));
}

TEST(SmirnovTest, ConstantMatchesHighPrecisionValue) {
  // sqrt(-ln(0.025) / 2) evaluated with 50 significant digits.
  EXPECT_NEAR(smirnov_constant(0.05), 1.3581015157406195, 1e-14);
  // c(alpha) = 1 exactly at alpha = 2 exp(-2).
  EXPECT_NEAR(smirnov_constant(2.0 * std::exp(-2.0)), 1.0, 1e-15);
  EXPECT_THROW(smirnov_constant(0.0), ArgumentError);
  EXPECT_THROW(smirnov_constant(1.0), ArgumentError);
}

TEST(SmirnovTest, ThresholdScalesWithSampleSizes) {
  EXPECT_NEAR(smirnov_threshold(0.05, 50000, 50000), 0.008589388166934751, 1e-15);
  EXPECT_GT(smirnov_threshold(0.01, 100, 100), smirnov_threshold(0.05, 100, 100));
  EXPECT_GT(smirnov_threshold(0.05, 100, 100), smirnov_threshold(0.05, 1000, 1000));
}

TEST(SmirnovTest, PValueIsConsistentWithThreshold) {
  for (double alpha : {0.01, 0.05, 0.2}) {
    const double t = smirnov_threshold(alpha, 400, 300);
    EXPECT_NEAR(smirnov_p_value(t, 400, 300), alpha, 1e-12);
  }
  EXPECT_DOUBLE_EQ(smirnov_p_value(0.0, 10, 10), 1.0);
}

TEST(KsTwoSampleTest, IdenticalSamplesDoNotReject) {
  std::mt19937_64 rng(5);
  const auto a = testing::uniform_sample(rng, 200);
  const KsTestResult r = ks_two_sample_test(EmpiricalCdf(a), EmpiricalCdf(a), 0.05);
  EXPECT_FALSE(r.reject_null);
  EXPECT_DOUBLE_EQ(r.distance, 0.0);
  EXPECT_DOUBLE_EQ(r.p_value, 1.0);
}

TEST(KsTwoSampleTest, ShiftedSamplesReject) {
  std::mt19937_64 rng(6);
  const auto a = testing::uniform_sample(rng, 500);
  const auto b = testing::uniform_sample(rng, 500, 0.3, 1.3);
  const KsTestResult r = ks_two_sample_test(EmpiricalCdf(a), EmpiricalCdf(b), 0.05);
  EXPECT_TRUE(r.reject_null);
  EXPECT_LT(r.p_value, 1e-6);
  EXPECT_EQ(r.n, 500u);
}

TEST(KsTwoSampleTest, NullRejectionRateIsCalibrated) {
  std::mt19937_64 rng(7);
  int rejections = 0;
  const int trials = 500;
  for (int t = 0; t < trials; ++t) {
    const auto a = testing::uniform_sample(rng, 200), b = testing::uniform_sample(rng, 200);
    rejections += ks_two_sample_test(EmpiricalCdf(a), EmpiricalCdf(b), 0.05).reject_null ? 1 : 0;
  }
  const double rate = static_cast<double>(rejections) / trials;
  EXPECT_GE(rate, 0.01);
  EXPECT_LE(rate, 0.09);
}

}  // namespace
}  // namespace memaudit
