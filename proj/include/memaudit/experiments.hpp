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

#pragma once

// Desk-scale experiment drivers: explicit memorization curves, validation
// leakage injection, final-output and partial-layer membership attacks, and
// the shadow-model attack. Every driver is a pure function of its spec.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "memaudit/attacks.hpp"
#include "memaudit/audit.hpp"
#include "memaudit/capacity.hpp"
#include "memaudit/error.hpp"
#include "memaudit/parallel.hpp"
#include "memaudit/scores.hpp"
#include "memaudit/shadow.hpp"
#include "memaudit/synthetic.hpp"
#include "memaudit/tinynet.hpp"
#include "memaudit/train.hpp"

namespace memaudit {

enum class ExperimentKind { kMemorize, kLeak, kAttackFinal, kAttackPartial, kShadow };

inline std::string_view to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::kMemorize: return "memorize";
    case ExperimentKind::kLeak: return "leak";
    case ExperimentKind::kAttackFinal: return "attack_final";
    case ExperimentKind::kAttackPartial: return "attack_partial";
    case ExperimentKind::kShadow: return "shadow";
  }
  return "memorize";
}

inline ExperimentKind parse_experiment_kind(std::string_view s) {
  for (auto k : {ExperimentKind::kMemorize, ExperimentKind::kLeak, ExperimentKind::kAttackFinal,
                 ExperimentKind::kAttackPartial, ExperimentKind::kShadow}) {
    if (s == to_string(k)) return k;
  }
  throw InputError("unknown experiment kind '" + std::string(s) + "'");
}

// What the logistic attack sees: the aligned activations themselves, or the
// true-class score and margin of a class probe fitted on them.
enum class ShadowFeatures { kActivations, kProbe };

inline std::string_view to_string(ShadowFeatures f) {
  return f == ShadowFeatures::kActivations ? "activations" : "probe";
}

inline ShadowFeatures parse_shadow_features(std::string_view s) {
  if (s == "activations") return ShadowFeatures::kActivations;
  if (s == "probe") return ShadowFeatures::kProbe;
  throw InputError("unknown shadow feature set '" + std::string(s) + "'");
}

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::kMemorize;
  TinyNetConfig model;  // seed and output_dim are set per cell
  TrainConfig train;    // augmentation and seed are set per cell
  std::vector<AugmentationMode> augmentations = {AugmentationMode::kNone};
  std::vector<std::uint64_t> seeds = {1};

  // memorize
  std::size_t pool_size = 100'000;
  std::vector<std::size_t> grid;          // positive counts; when empty,
  std::vector<double> grid_factors;       // multiples of the capacity crossover
  int max_freq = 4;

  // classification experiments
  int classes = 20;
  double separation = 0.7;
  PoseJitter pose = {true, 4};
  int per_class_train = 50;   // private training set; the held-out evaluation set has the same size
  int per_class_public = 50;  // attacker's public data
  int per_class_val = 20;
  int per_class_test = 20;
  std::vector<int> leak_levels = {0, 1, 5, 20};
  double alpha = kDefaultLeakageAlpha;

  // partial-layers and shadow attacks
  std::vector<std::string> cuts = {"softmax", "fc1", "last_block"};
  TrainConfig retrain;  // head retraining / shadow training
  int shadow_count = 5;
  std::string shadow_cut = "fc1";
  ShadowFeatures shadow_features = ShadowFeatures::kProbe;

  std::string out_dir;  // reports and score files; empty = none written
};

// Desk-scale defaults per experiment kind.
inline ExperimentSpec default_spec(ExperimentKind kind) {
  ExperimentSpec s;
  s.kind = kind;
  if (kind == ExperimentKind::kMemorize) {
    s.model = TinyNetConfig::t1_scaled(8);
    s.augmentations = {AugmentationMode::kNone, AugmentationMode::kFlip};
    s.seeds = {1, 2, 3};
    s.grid_factors = {0.25, 0.5, 1.0, 2.0, 4.0};
    s.train.schedule = LrSchedule::kAccuracyStaged;
    s.train.batch_size = 8;
    s.train.max_epochs = 150;
  } else {
    s.model = TinyNetConfig::t2();
    s.seeds = {1, 2, 3};
    s.train.schedule = LrSchedule::kStep;
    s.train.batch_size = 32;
    s.train.max_epochs = 40;
    if (kind == ExperimentKind::kLeak) s.seeds = {1, 2, 3, 4, 5};
    if (kind == ExperimentKind::kAttackFinal) {
      s.augmentations = {AugmentationMode::kNone, AugmentationMode::kFlip, AugmentationMode::kFlipCrop2,
                         AugmentationMode::kFlipCrop5};
    }
  }
  s.retrain = s.train;
  return s;
}

// ------------------------------------------------------------ helpers

inline double median(std::vector<double> v) {
  if (v.empty()) throw ArgumentError("median of an empty list");
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

// Upper edge of the no-signal band for a MAT accuracy fitted on the very
// sets it is scored on: 1/2 + 1/2 * (K-S rejection threshold at `alpha`).
inline double mat_noise_band(std::size_t members, std::size_t nonmembers, double alpha = 0.01) {
  return 0.5 + 0.5 * smirnov_threshold(alpha, members, nonmembers);
}

inline std::vector<const Image*> image_pointers(const std::vector<LabeledImage>& data) {
  std::vector<const Image*> out;
  out.reserve(data.size());
  for (const auto& d : data) out.push_back(&d.image);
  return out;
}

inline std::vector<int> labels_of(const std::vector<LabeledImage>& data) {
  std::vector<int> out;
  out.reserve(data.size());
  for (const auto& d : data) out.push_back(d.label);
  return out;
}

// Score extraction: one ScoreSample per image, ids from the data.
template <typename Scalar>
ScoreSet score_set(const TinyNet<Scalar>& model, const std::vector<LabeledImage>& data,
                   ScoreKind kind, std::string tag) {
  const auto ptrs = image_pointers(data);
  const auto labels = labels_of(data);
  const auto preds = predict(model, std::span<const Image* const>(ptrs), labels);
  ScoreSet set{kind, std::move(tag), {}};
  set.samples.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double score = kind == ScoreKind::kConfidence ? preds[i].confidence : std::max(0.0, preds[i].loss);
    set.samples.push_back({data[i].id, data[i].label, preds[i].label, score});
  }
  return set;
}

// ------------------------------------------------------- memorization

struct MemorizationPoint {
  std::size_t n = 0;
  AugmentationMode mode = AugmentationMode::kNone;
  std::uint64_t seed = 0;
  double balanced_accuracy = 0.0;
  double true_positive_rate = 0.0;
  double true_negative_rate = 0.0;
  int epochs_to_converge = 0;
};

struct MemorizationCurve {
  std::vector<MemorizationPoint> points;  // sorted by (mode, n, seed)
  std::size_t param_count = 0;
  std::size_t pool_size = 0;
  std::uint64_t crossover_n = 0;
  std::uint64_t crossover_n_2bits = 0;

  // Median balanced accuracy over seeds at (n, mode).
  double median_accuracy(std::size_t n, AugmentationMode mode) const {
    std::vector<double> acc;
    for (const auto& p : points) {
      if (p.n == n && p.mode == mode) acc.push_back(p.balanced_accuracy);
    }
    return median(acc);
  }
};

// Trains one in/out model on `n` positives drawn from a pool of N smooth
// noise images. Each epoch feeds every positive plus n fresh negatives; a
// separate held-out negative pool of size n scores the model.
inline MemorizationPoint run_memorization_cell(const ExperimentSpec& spec, std::size_t n,
                                               AugmentationMode mode, std::uint64_t seed) {
  const std::size_t N = spec.pool_size;
  if (n == 0 || 3 * n > N) throw ArgumentError("positive count must satisfy 0 < 3n <= N");
  SmoothNoisePool pool(mix_seed(seed, 0x9001), N, spec.max_freq);
  std::vector<std::size_t> perm(N);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::mt19937_64 split_rng(mix_seed(seed, 0x5917));
  std::shuffle(perm.begin(), perm.end(), split_rng);

  std::vector<Image> positives, eval_negatives;
  positives.reserve(n);
  eval_negatives.reserve(n);
  for (std::size_t i = 0; i < n; ++i) positives.push_back(pool[perm[i]]);
  for (std::size_t i = 0; i < n; ++i) eval_negatives.push_back(pool[perm[n + i]]);

  // Training negatives come from perm[2n, N).
  std::vector<Image> negatives(n);
  EpochSampler sampler = [&](int, std::mt19937_64& rng) {
    std::vector<TrainExample> ex;
    ex.reserve(2 * n);
    for (const auto& p : positives) ex.push_back({&p, 1});
    std::uniform_int_distribution<std::size_t> pick(2 * n, N - 1);
    for (std::size_t i = 0; i < n; ++i) {
      negatives[i] = pool[perm[pick(rng)]];
      ex.push_back({&negatives[i], 0});
    }
    return ex;
  };

  TinyNetConfig cfg = spec.model;
  cfg.output_dim = 2;
  cfg.seed = mix_seed(seed, 0x3E7);
  TinyNet<float> model(cfg);
  TrainConfig tc = spec.train;
  tc.augmentation = mode;
  tc.seed = mix_seed(seed, 0x7A1);
  const TrainResult tr = train(model, sampler, tc);

  const auto pos = predict(model, std::span<const Image* const>(image_pointers(positives)));
  const auto neg = predict(model, std::span<const Image* const>(image_pointers(eval_negatives)));
  std::size_t tp = 0, tn = 0;
  for (const auto& p : pos) tp += p.label == 1 ? 1 : 0;
  for (const auto& p : neg) tn += p.label == 0 ? 1 : 0;
  MemorizationPoint pt;
  pt.n = n;
  pt.mode = mode;
  pt.seed = seed;
  pt.true_positive_rate = static_cast<double>(tp) / static_cast<double>(n);
  pt.true_negative_rate = static_cast<double>(tn) / static_cast<double>(n);
  pt.balanced_accuracy = 0.5 * (pt.true_positive_rate + pt.true_negative_rate);
  pt.epochs_to_converge = tr.epochs_run;
  return pt;
}

// Positive counts of the grid: explicit values, or crossover multiples.
inline std::vector<std::size_t> memorization_grid(const ExperimentSpec& spec, std::uint64_t crossover) {
  std::vector<std::size_t> grid = spec.grid;
  if (grid.empty()) {
    for (double f : spec.grid_factors) {
      grid.push_back(std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(f * static_cast<double>(crossover)))));
    }
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (grid.empty()) throw ArgumentError("memorization grid is empty");
  return grid;
}

inline MemorizationCurve run_memorization(const ExperimentSpec& spec) {
  if (spec.seeds.empty()) throw ArgumentError("seeds must be non-empty");
  MemorizationCurve curve;
  curve.pool_size = spec.pool_size;
  curve.param_count = param_count(spec.model);
  const CapacityCrossover cross = capacity_crossover(curve.param_count, spec.pool_size);
  curve.crossover_n = cross.n_star;
  curve.crossover_n_2bits = cross.n_star_2bits;
  const auto grid = memorization_grid(spec, cross.n_star);

  struct Cell {
    std::size_t n;
    AugmentationMode mode;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (auto mode : spec.augmentations) {
    for (auto n : grid) {
      for (auto seed : spec.seeds) cells.push_back({n, mode, seed});
    }
  }
  curve.points = parallel_map(cells.size(), [&](std::size_t i) {
    const Cell& c = cells[i];
    try {
      return run_memorization_cell(spec, c.n, c.mode, c.seed);
    } catch (const DivergenceError& e) {
      throw DivergenceError("memorization cell n=" + std::to_string(c.n) + " mode=" +
                            std::string(to_string(c.mode)) + ": " + e.what());
    }
  });
  return curve;
}

// ------------------------------------------------ classification data

struct ClassificationData {
  std::vector<LabeledImage> train;    // private training set
  std::vector<LabeledImage> heldout;  // never trained on by the private model
  std::vector<LabeledImage> public_set;
  std::vector<LabeledImage> val;
  std::vector<LabeledImage> test;
};

inline ClassificationData make_classification_data(const ExperimentSpec& spec, std::uint64_t seed) {
  SyntheticClasses gen(mix_seed(seed, 0xDA7A), spec.classes, spec.separation, spec.max_freq, spec.pose);
  ClassificationData d;
  std::uint64_t next = 0;
  auto take = [&](const std::string& tag, int per_class) {
    auto split = gen.make_split(tag, next, per_class);
    next += static_cast<std::uint64_t>(per_class);
    return split;
  };
  d.train = take("train", spec.per_class_train);
  d.heldout = take("heldout", spec.per_class_train);
  d.public_set = take("public", spec.per_class_public);
  d.val = take("val", spec.per_class_val);
  d.test = take("test", spec.per_class_test);
  return d;
}

inline TinyNetConfig classifier_config(const ExperimentSpec& spec, std::uint64_t seed) {
  TinyNetConfig cfg = spec.model;
  cfg.output_dim = spec.classes;
  cfg.seed = seed;
  return cfg;
}

inline TinyNet<float> train_classifier(const ExperimentSpec& spec, const std::vector<LabeledImage>& data,
                                       AugmentationMode mode, std::uint64_t seed) {
  TinyNet<float> model(classifier_config(spec, mix_seed(seed, 0x3E7)));
  TrainConfig tc = spec.train;
  tc.augmentation = mode;
  tc.seed = mix_seed(seed, 0x7A1);
  train(model, fixed_set_sampler(data), tc);
  return model;
}

// ------------------------------------------------------------ leakage

struct LeakageRow {
  int leaked_per_class = 0;
  std::uint64_t seed = 0;
  LeakageReport report;
  ScoreSet val_scores, test_scores;
};

struct LeakageTable {
  std::vector<LeakageRow> rows;
  std::map<int, double> median_p_value;  // by leaked_per_class
};

inline LeakageTable run_leakage(const ExperimentSpec& spec) {
  if (spec.seeds.empty()) throw ArgumentError("seeds must be non-empty");
  for (int s : spec.leak_levels) {
    if (s < 0 || s > spec.per_class_val) throw ArgumentError("leak level exceeds the validation set");
  }
  struct Cell {
    int s;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (int s : spec.leak_levels) {
    for (auto seed : spec.seeds) cells.push_back({s, seed});
  }
  LeakageTable table;
  table.rows = parallel_map(cells.size(), [&](std::size_t i) {
    const Cell& c = cells[i];
    const ClassificationData data = make_classification_data(spec, c.seed);
    std::vector<LabeledImage> fit = data.train;
    // The first s validation images of every class (make_split is class-major).
    for (int k = 0; k < spec.classes; ++k) {
      for (int j = 0; j < c.s; ++j) fit.push_back(data.val[static_cast<std::size_t>(k * spec.per_class_val + j)]);
    }
    const TinyNet<float> model = train_classifier(spec, fit, spec.augmentations.front(), c.seed);
    const ScoreSet val = score_set(model, data.val, ScoreKind::kConfidence, "val");
    const ScoreSet test = score_set(model, data.test, ScoreKind::kConfidence, "test");
    return LeakageRow{c.s, c.seed, detect_leakage(val, test, spec.alpha), val, test};
  });
  for (int s : spec.leak_levels) {
    std::vector<double> p;
    for (const auto& r : table.rows) {
      if (r.leaked_per_class == s) p.push_back(r.report.ks.p_value);
    }
    table.median_p_value[s] = median(p);
  }
  return table;
}

// ------------------------------------------------------------ attacks

struct FinalAttackRow {
  AugmentationMode mode = AugmentationMode::kNone;
  std::uint64_t seed = 0;
  double train_accuracy = 0.0;    // p_train
  double heldout_accuracy = 0.0;  // p_test
  double bayes = 0.0;
  double mat = 0.0;
  MatModel mat_model;
  ScoreSet members, nonmembers;
};

struct PartialAttackRow {
  AugmentationMode mode = AugmentationMode::kNone;
  std::uint64_t seed = 0;
  std::string cut;
  double mat = 0.0;
  double bayes = 0.0;
  ScoreSet members, nonmembers;
};

// Bayes and MAT (on per-sample loss) against a model, members = data.train.
template <typename Scalar>
FinalAttackRow attack_model(const TinyNet<Scalar>& model, const ClassificationData& data,
                            AugmentationMode mode, std::uint64_t seed) {
  const ScoreSet members = score_set(model, data.train, ScoreKind::kLoss, "train");
  const ScoreSet nonmembers = score_set(model, data.heldout, ScoreKind::kLoss, "heldout");
  FinalAttackRow row;
  row.mode = mode;
  row.seed = seed;
  row.train_accuracy = correctness_rate(members);
  row.heldout_accuracy = correctness_rate(nonmembers);
  row.bayes = run_bayes_attack(members, nonmembers).accuracy;
  row.mat = run_mat_attack(members, nonmembers, &row.mat_model).accuracy;
  row.members = members;
  row.nonmembers = nonmembers;
  return row;
}

inline std::vector<FinalAttackRow> run_attack_final(const ExperimentSpec& spec) {
  if (spec.seeds.empty()) throw ArgumentError("seeds must be non-empty");
  struct Cell {
    AugmentationMode mode;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (auto mode : spec.augmentations) {
    for (auto seed : spec.seeds) cells.push_back({mode, seed});
  }
  return parallel_map(cells.size(), [&](std::size_t i) {
    const Cell& c = cells[i];
    const ClassificationData data = make_classification_data(spec, c.seed);
    const TinyNet<float> model = train_classifier(spec, data.train, c.mode, c.seed);
    return attack_model(model, data, c.mode, c.seed);
  });
}

inline std::vector<PartialAttackRow> run_attack_partial(const ExperimentSpec& spec) {
  if (spec.seeds.empty()) throw ArgumentError("seeds must be non-empty");
  struct Cell {
    AugmentationMode mode;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (auto mode : spec.augmentations) {
    for (auto seed : spec.seeds) cells.push_back({mode, seed});
  }
  auto per_cell = parallel_map(cells.size(), [&](std::size_t i) {
    const Cell& c = cells[i];
    const ClassificationData data = make_classification_data(spec, c.seed);
    const TinyNet<float> model = train_classifier(spec, data.train, c.mode, c.seed);
    std::vector<PartialAttackRow> rows;
    for (const auto& cut : spec.cuts) {
      TrainConfig tc = spec.retrain;
      tc.augmentation = c.mode;
      tc.seed = mix_seed(c.seed, 0xC0DE);
      const RetrainResult rr = truncate_and_retrain(model, cut, fixed_set_sampler(data.public_set), tc);
      FinalAttackRow a = attack_model(rr.model, data, c.mode, c.seed);
      rows.push_back({c.mode, c.seed, cut, a.mat, a.bayes, std::move(a.members), std::move(a.nonmembers)});
    }
    return rows;
  });
  std::vector<PartialAttackRow> out;
  for (auto& v : per_cell) out.insert(out.end(), v.begin(), v.end());
  return out;
}

// ------------------------------------------------------------- shadow

struct ShadowSplit {
  std::vector<std::size_t> train;  // indices into the public set
  std::vector<std::size_t> heldout;
};

struct ShadowEnsemble {
  int count = 0;
  std::string cut;
  ShadowFeatures features = ShadowFeatures::kProbe;
  std::vector<ShadowSplit> splits;
  std::vector<LinearMap> alignment;
  ClassProbe probe;  // empty unless features == kProbe
  LogisticModel attack;

  Eigen::MatrixXd attack_features(const Eigen::MatrixXd& aligned, std::span<const int> labels) const {
    return features == ShadowFeatures::kProbe ? probe.margins(aligned, labels) : aligned;
  }
};

struct ShadowResult {
  AugmentationMode mode = AugmentationMode::kNone;
  std::uint64_t seed = 0;
  ShadowEnsemble ensemble;
  double accuracy = 0.0;
  double attack_train_accuracy = 0.0;
};

inline double membership_accuracy(const Eigen::VectorXd& p, std::span<const int> member) {
  std::size_t correct = 0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    correct += (p(i) > 0.5) == (member[static_cast<std::size_t>(i)] == 1) ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(p.size());
}

// Shadow attack against an already trained target. Shadows are trained on
// random halves of the public set; their activations at `cut` are aligned to
// the target's on the full public set and feed one logistic classifier.
inline ShadowResult run_shadow_attack(const ExperimentSpec& spec, const TinyNet<float>& target,
                                      const ClassificationData& data, AugmentationMode mode,
                                      std::uint64_t seed) {
  if (spec.shadow_count < 1) throw ArgumentError("shadow_count must be >= 1");
  if (data.public_set.size() < 4) throw ArgumentError("public set too small for shadow splits");
  const std::size_t layer = cut_layer_index(target, spec.shadow_cut);
  const auto pub_ptrs = image_pointers(data.public_set);
  const std::span<const Image* const> pub(pub_ptrs);
  const std::vector<int> pub_labels = labels_of(data.public_set);
  const Eigen::MatrixXd target_pub = layer_activations(target, pub, layer);

  ShadowResult result;
  result.mode = mode;
  result.seed = seed;
  ShadowEnsemble& ens = result.ensemble;
  ens.count = spec.shadow_count;
  ens.cut = spec.shadow_cut;
  ens.features = spec.shadow_features;

  const auto n_pub = static_cast<Eigen::Index>(data.public_set.size());
  Eigen::MatrixXd aligned(target_pub.rows(), n_pub * spec.shadow_count);
  std::vector<int> member, classes;
  for (int j = 0; j < spec.shadow_count; ++j) {
    const std::uint64_t shadow_seed = mix_seed(seed, 0x5AD0 + static_cast<std::uint64_t>(j));
    std::mt19937_64 rng(shadow_seed);
    std::vector<std::size_t> idx(data.public_set.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto half = static_cast<std::ptrdiff_t>(idx.size() / 2);
    ShadowSplit split;
    split.train.assign(idx.begin(), idx.begin() + half);
    split.heldout.assign(idx.begin() + half, idx.end());
    std::vector<LabeledImage> shadow_train;
    for (auto i : split.train) shadow_train.push_back(data.public_set[i]);

    const TinyNet<float> shadow = train_classifier(spec, shadow_train, mode, shadow_seed);
    const Eigen::MatrixXd shadow_pub = layer_activations(shadow, pub, layer);
    LinearMap map = fit_alignment(shadow_pub, target_pub);
    aligned.middleCols(n_pub * j, n_pub) = map.apply(shadow_pub);
    std::vector<int> in(data.public_set.size(), 0);
    for (auto i : split.train) in[i] = 1;
    member.insert(member.end(), in.begin(), in.end());
    classes.insert(classes.end(), pub_labels.begin(), pub_labels.end());
    ens.splits.push_back(std::move(split));
    ens.alignment.push_back(std::move(map));
  }
  if (ens.features == ShadowFeatures::kProbe) ens.probe = fit_class_probe(aligned, classes, spec.classes);
  const Eigen::MatrixXd train_features = ens.attack_features(aligned, classes);
  ens.attack = fit_logistic(train_features, member);
  result.attack_train_accuracy = membership_accuracy(ens.attack.probabilities(train_features), member);

  // Target side: members are the private training set, non-members the
  // held-out evaluation set.
  std::vector<LabeledImage> eval = data.train;
  eval.insert(eval.end(), data.heldout.begin(), data.heldout.end());
  std::vector<int> eval_member(eval.size(), 0);
  std::fill_n(eval_member.begin(), data.train.size(), 1);
  const auto eval_ptrs = image_pointers(eval);
  const Eigen::MatrixXd target_eval =
      layer_activations(target, std::span<const Image* const>(eval_ptrs), layer);
  const Eigen::VectorXd p = ens.attack.probabilities(ens.attack_features(target_eval, labels_of(eval)));
  result.accuracy = membership_accuracy(p, eval_member);
  return result;
}

inline std::vector<ShadowResult> run_shadow(const ExperimentSpec& spec) {
  if (spec.seeds.empty()) throw ArgumentError("seeds must be non-empty");
  struct Cell {
    AugmentationMode mode;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (auto mode : spec.augmentations) {
    for (auto seed : spec.seeds) cells.push_back({mode, seed});
  }
  return parallel_map(cells.size(), [&](std::size_t i) {
    const Cell& c = cells[i];
    const ClassificationData data = make_classification_data(spec, c.seed);
    const TinyNet<float> target = train_classifier(spec, data.train, c.mode, c.seed);
    return run_shadow_attack(spec, target, data, c.mode, c.seed);
  });
}

}  // namespace memaudit
