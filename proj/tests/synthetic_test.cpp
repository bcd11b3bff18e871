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


#include "memaudit/synthetic.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

namespace memaudit {
namespace {

double mean_abs_diff(const Image& a, const Image& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) s += std::abs(a.data()[i] - b.data()[i]);
  return s / static_cast<double>(a.data().size());
}

TEST(MixSeedTest, DistinctStreams) {
  EXPECT_NE(mix_seed(1, 0), mix_seed(1, 1));
  EXPECT_NE(mix_seed(1, 0), mix_seed(2, 0));
  EXPECT_EQ(mix_seed(7, 3), mix_seed(7, 3));
}

TEST(FourierRendererTest, RangeAndCounts) {
  FourierRenderer r(4);
  EXPECT_EQ(r.basis_size(), 9);
  EXPECT_EQ(r.coefficient_count(), 243u);
  std::mt19937_64 rng(3);
  const Image img = r.render(r.sample_coefficients(rng));
  for (float v : img.data()) {
    ASSERT_GT(v, 0.0f);
    ASSERT_LT(v, 1.0f);
  }
  EXPECT_THROW(r.render(std::vector<double>(5)), ArgumentError);
  EXPECT_THROW(FourierRenderer(-1), ArgumentError);
}

TEST(FourierRendererTest, ZeroCoefficientsGiveGray) {
  FourierRenderer r(2);
  const Image img = r.render(std::vector<double>(r.coefficient_count(), 0.0));
  for (float v : img.data()) ASSERT_EQ(v, 0.5f);
}

TEST(SmoothNoisePoolTest, RandomAccessIsDeterministic) {
  SmoothNoisePool pool(9, 100);
  EXPECT_EQ(pool[17], pool[17]);
  EXPECT_EQ(SmoothNoisePool(9, 100)[17], pool[17]);
  EXPECT_NE(pool[17], pool[18]);
  EXPECT_NE(SmoothNoisePool(10, 100)[17], pool[17]);
  EXPECT_THROW(pool[100], ArgumentError);
}

TEST(CircularViewTest, ShiftWrapsAround) {
  Image img(ImageShape{1, 2, 3});
  for (int x = 0; x < 3; ++x) img.at(0, 0, x) = static_cast<float>(x);
  const Image s = circular_view(img, false, 1, 0);
  EXPECT_EQ(s.at(0, 0, 0), 2.0f);
  EXPECT_EQ(s.at(0, 0, 1), 0.0f);
  const Image d = circular_view(img, false, 0, 1);
  EXPECT_EQ(d.at(0, 1, 2), 2.0f);
  EXPECT_EQ(circular_view(circular_view(img, true, 0, 0), true, 0, 0), img);
}

TEST(SyntheticClassesTest, DeterministicAndSeparated) {
  SyntheticClasses cls(5, 4, 2.0);
  EXPECT_EQ(cls.num_classes(), 4);
  EXPECT_EQ(cls.sample(2, 11), cls.sample(2, 11));
  // Same-class images are closer than cross-class images on average.
  double within = 0.0, across = 0.0;
  for (int i = 0; i < 20; ++i) {
    within += mean_abs_diff(cls.sample(0, 2 * i), cls.sample(0, 2 * i + 1));
    across += mean_abs_diff(cls.sample(0, 2 * i), cls.sample(1, 2 * i + 1));
  }
  EXPECT_LT(within, across);
  EXPECT_THROW(cls.sample(4, 0), ArgumentError);
  EXPECT_THROW(SyntheticClasses(5, 1, 1.0), ArgumentError);
}

TEST(SyntheticClassesTest, PoseIsAppliedAfterRendering) {
  SyntheticClasses plain(5, 3, 1.0);
  SyntheticClasses posed(5, 3, 1.0, 4, PoseJitter{true, 4});
  int differing = 0;
  for (int i = 0; i < 10; ++i) differing += plain.sample(1, i) == posed.sample(1, i) ? 0 : 1;
  EXPECT_GT(differing, 5);
  EXPECT_EQ(posed.sample(1, 3), posed.sample(1, 3));
  EXPECT_THROW(SyntheticClasses(5, 3, 1.0, 4, PoseJitter{false, -1}), ArgumentError);
}

TEST(SyntheticClassesTest, SplitsAreLabelledAndDisjoint) {
  SyntheticClasses cls(1, 3, 1.0);
  const auto a = cls.make_split("train", 0, 4);
  const auto b = cls.make_split("test", 4, 4);
  ASSERT_EQ(a.size(), 12u);
  EXPECT_EQ(a[5].label, 1);
  EXPECT_EQ(a[5].id, "train_c1_1");
  EXPECT_EQ(b[0].id, "test_c0_4");
  EXPECT_EQ(a[0].image, cls.sample(0, 0));
  EXPECT_NE(a[0].image, b[0].image);
}

}  // namespace
}  // namespace memaudit
