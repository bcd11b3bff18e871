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


#include "memaudit/experiments.hpp"

#include <algorithm>
#include <set>

#include <gtest/gtest.h>

namespace memaudit {
namespace {

ExperimentSpec tiny(ExperimentKind kind) {
  ExperimentSpec s = default_spec(kind);
  s.model = TinyNetConfig::t1_scaled(4);
  s.classes = 4;
  s.separation = 1.5;
  s.per_class_train = 12;
  s.per_class_public = 12;
  s.per_class_val = 6;
  s.per_class_test = 6;
  s.seeds = {1};
  s.augmentations = {AugmentationMode::kNone};
  s.train.max_epochs = 4;
  s.train.batch_size = 8;
  s.retrain = s.train;
  return s;
}

TEST(ExperimentKindTest, Names) {
  for (auto k : {ExperimentKind::kMemorize, ExperimentKind::kLeak, ExperimentKind::kAttackFinal,
                 ExperimentKind::kAttackPartial, ExperimentKind::kShadow}) {
    EXPECT_EQ(parse_experiment_kind(to_string(k)), k);
  }
  EXPECT_THROW(parse_experiment_kind("train"), InputError);
  EXPECT_EQ(parse_shadow_features("probe"), ShadowFeatures::kProbe);
}

TEST(HelpersTest, MedianAndBand) {
  EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_EQ(median({4.0, 1.0, 2.0, 3.0}), 2.5);
  EXPECT_THROW(median({}), ArgumentError);
  EXPECT_NEAR(mat_noise_band(1000, 1000), 0.5 + 0.5 * smirnov_threshold(0.01, 1000, 1000), 1e-15);
  EXPECT_NEAR(mat_noise_band(1000, 1000), 0.5364, 1e-4);
}

TEST(MemorizationTest, GridFromCrossover) {
  ExperimentSpec s = default_spec(ExperimentKind::kMemorize);
  EXPECT_EQ(memorization_grid(s, 1695), (std::vector<std::size_t>{424, 848, 1695, 3390, 6780}));
  s.grid_factors = {};
  EXPECT_THROW(memorization_grid(s, 10), ArgumentError);
}

TEST(MemorizationTest, TinyCurveIsDeterministic) {
  ExperimentSpec s = default_spec(ExperimentKind::kMemorize);
  s.model = TinyNetConfig::t1_scaled(2);
  s.pool_size = 3000;
  s.grid = {8, 16};
  s.seeds = {1, 2};
  s.train.max_epochs = 3;
  const auto a = run_memorization(s);
  const auto b = run_memorization(s);
  ASSERT_EQ(a.points.size(), 8u);
  EXPECT_EQ(a.param_count, param_count(s.model));
  EXPECT_EQ(a.crossover_n, capacity_crossover(a.param_count, 3000).n_star);
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    EXPECT_EQ(a.points[i].balanced_accuracy, b.points[i].balanced_accuracy);
    EXPECT_GE(a.points[i].balanced_accuracy, 0.0);
    EXPECT_LE(a.points[i].balanced_accuracy, 1.0);
    EXPECT_EQ(a.points[i].epochs_to_converge, 3);
  }
  EXPECT_EQ(a.points.front().mode, AugmentationMode::kNone);
  EXPECT_EQ(a.points.back().mode, AugmentationMode::kFlip);
  EXPECT_THROW(run_memorization_cell(s, 1001, AugmentationMode::kNone, 1), ArgumentError);
}

TEST(ClassificationDataTest, SplitsAreDisjointAndSized) {
  const ExperimentSpec s = tiny(ExperimentKind::kAttackFinal);
  const auto d = make_classification_data(s, 3);
  EXPECT_EQ(d.train.size(), 48u);
  EXPECT_EQ(d.heldout.size(), 48u);
  EXPECT_EQ(d.public_set.size(), 48u);
  EXPECT_EQ(d.val.size(), 24u);
  EXPECT_EQ(d.test.size(), 24u);
  std::set<std::string> ids;
  for (const auto* split : {&d.train, &d.heldout, &d.public_set, &d.val, &d.test}) {
    for (const auto& x : *split) ids.insert(x.id);
  }
  EXPECT_EQ(ids.size(), 192u);
  EXPECT_EQ(make_classification_data(s, 3).train[5].image, d.train[5].image);
}

TEST(LeakageExperimentTest, RowsAndMedians) {
  ExperimentSpec s = tiny(ExperimentKind::kLeak);
  s.leak_levels = {0, 6};
  s.seeds = {1, 2, 3};
  const auto t = run_leakage(s);
  EXPECT_EQ(t.rows.size(), 6u);
  ASSERT_EQ(t.median_p_value.size(), 2u);
  for (const auto& r : t.rows) {
    EXPECT_EQ(r.val_scores.size(), 24u);
    EXPECT_EQ(r.val_scores.kind, ScoreKind::kConfidence);
  }
  s.leak_levels = {7};
  EXPECT_THROW(run_leakage(s), ArgumentError);
}

TEST(AttackExperimentTest, FinalRowsAreConsistent) {
  ExperimentSpec s = tiny(ExperimentKind::kAttackFinal);
  s.augmentations = {AugmentationMode::kNone, AugmentationMode::kFlip};
  const auto rows = run_attack_final(s);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) {
    EXPECT_DOUBLE_EQ(r.bayes, bayes_accuracy(r.train_accuracy, r.heldout_accuracy));
    EXPECT_DOUBLE_EQ(r.mat, r.mat_model.est_accuracy);  // balanced sets
    EXPECT_EQ(r.members.size(), 48u);
    EXPECT_EQ(r.members.kind, ScoreKind::kLoss);
  }
  EXPECT_EQ(rows[1].mode, AugmentationMode::kFlip);
  const auto again = run_attack_final(s);
  EXPECT_EQ(again[0].mat, rows[0].mat);
  EXPECT_EQ(again[1].bayes, rows[1].bayes);
}

TEST(AttackExperimentTest, SoftmaxCutEqualsFinalAttack) {
  ExperimentSpec s = tiny(ExperimentKind::kAttackPartial);
  s.cuts = {"softmax", "fc1"};
  const auto partial = run_attack_partial(s);
  const auto final_rows = run_attack_final(s);
  ASSERT_EQ(partial.size(), 2u);
  EXPECT_EQ(partial[0].cut, "softmax");
  EXPECT_EQ(partial[0].mat, final_rows[0].mat);
  EXPECT_EQ(partial[0].bayes, final_rows[0].bayes);
  EXPECT_EQ(partial[1].cut, "fc1");
}

TEST(AttackExperimentTest, UntrainedModelIsAtChance) {
  ExperimentSpec s = tiny(ExperimentKind::kAttackFinal);
  s.per_class_train = 50;
  const auto d = make_classification_data(s, 5);
  const TinyNet<float> model(classifier_config(s, 11));
  const auto row = attack_model(model, d, AugmentationMode::kNone, 5);
  EXPECT_LE(row.mat, mat_noise_band(200, 200));
  EXPECT_NEAR(row.bayes, 0.5, 0.1);
}

TEST(ShadowExperimentTest, TinyEnsemble) {
  ExperimentSpec s = tiny(ExperimentKind::kShadow);
  s.shadow_count = 2;
  const auto res = run_shadow(s);
  ASSERT_EQ(res.size(), 1u);
  const auto& r = res[0];
  EXPECT_EQ(r.ensemble.count, 2);
  EXPECT_EQ(r.ensemble.alignment.size(), 2u);
  EXPECT_EQ(r.ensemble.splits[0].train.size(), 24u);
  EXPECT_EQ(r.ensemble.probe.weights.rows(), 4);
  EXPECT_GE(r.accuracy, 0.0);
  EXPECT_LE(r.accuracy, 1.0);
  EXPECT_EQ(run_shadow(s)[0].accuracy, r.accuracy);

  s.shadow_features = ShadowFeatures::kActivations;
  EXPECT_EQ(run_shadow(s)[0].ensemble.probe.weights.size(), 0);
  s.shadow_count = 0;
  EXPECT_THROW(run_shadow(s), ArgumentError);
}

}  // namespace
}  // namespace memaudit
