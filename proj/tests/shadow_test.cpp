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


#include "memaudit/shadow.hpp"

#include <random>
#include <vector>

#include <gtest/gtest.h>

namespace memaudit {
namespace {

Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

TEST(AlignmentTest, SelfAlignmentIsIdentity) {
  const Eigen::MatrixXd a = gaussian(6, 40, 1);
  const LinearMap map = fit_alignment(a, a);
  EXPECT_FALSE(map.damped);
  EXPECT_LT(map.relative_residual, 1e-10);
  EXPECT_TRUE(map.matrix.isApprox(Eigen::MatrixXd::Identity(6, 6), 1e-9));
  EXPECT_LT(map.offset.norm(), 1e-9);
}

TEST(AlignmentTest, RecoversAffineMap) {
  const Eigen::MatrixXd src = gaussian(5, 60, 2);
  const Eigen::MatrixXd w = gaussian(3, 5, 3);
  Eigen::VectorXd b(3);
  b << 1.0, -2.0, 0.5;
  Eigen::MatrixXd dst = w * src;
  dst.colwise() += b;
  const LinearMap map = fit_alignment(src, dst);
  EXPECT_TRUE(map.matrix.isApprox(w, 1e-9));
  EXPECT_TRUE(map.offset.isApprox(b, 1e-9));
  EXPECT_TRUE(map.apply(src).isApprox(dst, 1e-9));
}

TEST(AlignmentTest, RankDeficientIsDampedAndFlagged) {
  // More features than samples.
  const Eigen::MatrixXd src = gaussian(20, 8, 4);
  const LinearMap map = fit_alignment(src, gaussian(3, 8, 5));
  EXPECT_TRUE(map.damped);
  EXPECT_GT(map.ridge, 0.0);
  EXPECT_TRUE(map.matrix.allFinite());
  // A constant (dead) unit also makes the design rank deficient.
  Eigen::MatrixXd dead = gaussian(4, 30, 6);
  dead.row(2).setZero();
  EXPECT_TRUE(fit_alignment(dead, dead).damped);
}

TEST(AlignmentTest, Errors) {
  EXPECT_THROW(fit_alignment(gaussian(2, 5, 1), gaussian(2, 4, 1)), ArgumentError);
  EXPECT_THROW(fit_alignment(gaussian(2, 1, 1), gaussian(2, 1, 1)), ArgumentError);
}

TEST(LogisticTest, SeparatesShiftedClouds) {
  Eigen::MatrixXd x = gaussian(2, 400, 7);
  std::vector<int> y(400);
  for (int i = 0; i < 400; ++i) {
    y[i] = i % 2;
    if (y[i]) x(0, i) += 3.0;
  }
  const LogisticModel m = fit_logistic(x, y);
  const Eigen::VectorXd p = m.probabilities(x);
  int correct = 0;
  for (int i = 0; i < 400; ++i) correct += (p(i) > 0.5) == (y[i] == 1) ? 1 : 0;
  EXPECT_GT(correct, 360);
  EXPECT_GT(m.weights(0), 0.0);
  EXPECT_THROW(fit_logistic(x, std::vector<int>(3)), ArgumentError);
}

TEST(LogisticTest, ConstantFeatureIsIgnored) {
  Eigen::MatrixXd x = gaussian(2, 50, 8);
  x.row(1).setConstant(4.0);
  std::vector<int> y(50);
  for (int i = 0; i < 50; ++i) y[i] = x(0, i) > 0 ? 1 : 0;
  const LogisticModel m = fit_logistic(x, y);
  EXPECT_EQ(m.inv_std(1), 0.0);
  EXPECT_TRUE(m.probabilities(x).allFinite());
}

TEST(ClassProbeTest, ScoresTrueClassHighest) {
  const int K = 3, n = 300;
  Eigen::MatrixXd x = 0.3 * gaussian(4, n, 9);
  std::vector<int> y(n);
  for (int i = 0; i < n; ++i) {
    y[i] = i % K;
    x(y[i], i) += 1.0;
  }
  const ClassProbe probe = fit_class_probe(x, y, K, 1e-3);
  const Eigen::MatrixXd m = probe.margins(x, y);
  ASSERT_EQ(m.rows(), 2);
  int positive = 0;
  for (int i = 0; i < n; ++i) positive += m(1, i) > 0 ? 1 : 0;
  EXPECT_GT(positive, 0.95 * n);
  // Margin is the true score minus the best other score.
  const Eigen::MatrixXd s = probe.scores(x);
  const double other = std::max(s(1, 0), s(2, 0));
  EXPECT_DOUBLE_EQ(m(0, 0), s(0, 0));
  EXPECT_DOUBLE_EQ(m(1, 0), s(0, 0) - other);
}

TEST(ClassProbeTest, Errors) {
  const Eigen::MatrixXd x = gaussian(3, 10, 1);
  std::vector<int> y(10, 0);
  EXPECT_THROW(fit_class_probe(x, y, 1), ArgumentError);
  y[3] = 5;
  EXPECT_THROW(fit_class_probe(x, y, 2), ArgumentError);
  const ClassProbe probe = fit_class_probe(x, std::vector<int>(10, 1), 2);
  EXPECT_THROW(probe.scores(gaussian(4, 2, 1)), ArgumentError);
  EXPECT_THROW(probe.margins(x, std::vector<int>(9, 0)), ArgumentError);
}

}  // namespace
}  // namespace memaudit
