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

// Membership-inference attacks that only look at per-sample score
// distributions: the Bayes (correctness) rule, the Maximum Accuracy
// Threshold (MAT) rule and the single-sample K-S assignment.

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "memaudit/error.hpp"
#include "memaudit/scores.hpp"
#include "memaudit/stats.hpp"

namespace memaudit {

// ---------------------------------------------------------------- Bayes rule

// Accuracy of "member iff classified correctly" under a balanced prior.
inline double bayes_accuracy(double p_train, double p_test) {
  if (!(p_train >= 0.0 && p_train <= 1.0 && p_test >= 0.0 && p_test <= 1.0)) {
    throw ArgumentError("probabilities must lie in [0, 1]");
  }
  return 0.5 + (p_train - p_test) / 2.0;
}

inline bool bayes_predict(const ScoreSample& s) {
  if (s.true_label < 0 || s.pred_label < 0) {
    throw InputError("labels required for Bayes attack (sample '" + s.id + "')");
  }
  return s.pred_label == s.true_label;
}

// Fraction of correctly classified samples in a labelled score set.
inline double correctness_rate(const ScoreSet& set) {
  if (set.empty()) throw InputError("empty sample");
  std::size_t correct = 0;
  for (const auto& s : set.samples) correct += bayes_predict(s) ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(set.size());
}

// ----------------------------------------------------------------------- MAT

enum class ThresholdDirection { kMemberIfBelow, kMemberIfAbove };

inline std::string_view to_string(ThresholdDirection d) {
  return d == ThresholdDirection::kMemberIfBelow ? "member_if_below" : "member_if_above";
}

struct MatModel {
  double tau = 0.0;
  ThresholdDirection direction = ThresholdDirection::kMemberIfBelow;
  double est_accuracy = 0.5;
  ScoreKind kind = ScoreKind::kLoss;
};

// Fits the accuracy-maximizing threshold between member and non-member
// score distributions. Candidates are the midpoints between consecutive
// distinct merged values plus one point below the minimum and one above the
// maximum; at those points F(tau-) == F(tau), so the strict comparison in
// mat_predict reproduces est_accuracy exactly on the fitting data (balanced
// accuracy). Ties go to the smallest tau.
inline MatModel fit_mat(const ScoreSet& train, const ScoreSet& heldout) {
  require_same_kind(train, heldout);
  if (train.empty() || heldout.empty()) throw InputError("empty sample");
  std::vector<double> a = train.scores();
  std::vector<double> b = heldout.scores();
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<double> merged;
  merged.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(merged));
  merged.erase(std::unique(merged.begin(), merged.end()), merged.end());

  const auto n = static_cast<std::int64_t>(a.size());
  const auto m = static_cast<std::int64_t>(b.size());
  // Below every sample: both CDFs are 0, gap 0.
  const double span = merged.back() - merged.front();
  double best_tau = merged.front() - std::max(1.0, span);
  std::int64_t best_gap = 0;  // n*m*(F_train - F_heldout), signed
  std::size_t i = 0, j = 0;
  for (std::size_t k = 0; k < merged.size(); ++k) {
    const double v = merged[k];
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    const std::int64_t gap = static_cast<std::int64_t>(i) * m - static_cast<std::int64_t>(j) * n;
    if (std::llabs(gap) > std::llabs(best_gap)) {
      best_gap = gap;
      best_tau = k + 1 < merged.size() ? v + (merged[k + 1] - v) / 2.0
                                       : v + std::max(1.0, span);
    }
  }

  MatModel model;
  model.kind = train.kind;
  model.tau = best_tau;
  if (best_gap > 0) {
    model.direction = ThresholdDirection::kMemberIfBelow;
  } else if (best_gap < 0) {
    model.direction = ThresholdDirection::kMemberIfAbove;
  } else {
    model.direction = train.kind == ScoreKind::kLoss ? ThresholdDirection::kMemberIfBelow
                                                     : ThresholdDirection::kMemberIfAbove;
  }
  model.est_accuracy =
      0.5 + 0.5 * static_cast<double>(std::llabs(best_gap)) /
                (static_cast<double>(n) * static_cast<double>(m));
  return model;
}

// Equality with tau is a non-member.
inline bool mat_predict(const MatModel& model, double score) {
  return model.direction == ThresholdDirection::kMemberIfBelow ? score < model.tau
                                                               : score > model.tau;
}

inline bool mat_predict(const MatModel& model, const ScoreSample& sample, ScoreKind kind) {
  if (kind != model.kind) throw ArgumentError("score kind mismatch with fitted MAT model");
  return mat_predict(model, sample.score);
}

// Honest-attacker variant: fits tau on a random `fit_fraction` of each set
// and reports the model; callers evaluate it on the complementary samples
// returned in `rest_train` / `rest_heldout`.
struct MatSplitFit {
  MatModel model;
  ScoreSet rest_train;
  ScoreSet rest_heldout;
};

inline MatSplitFit fit_mat_split(const ScoreSet& train, const ScoreSet& heldout,
                                 double fit_fraction, std::uint64_t seed) {
  if (!(fit_fraction > 0.0 && fit_fraction < 1.0)) {
    throw ArgumentError("fit_fraction must lie in (0, 1)");
  }
  std::mt19937_64 rng(seed);
  auto split = [&](const ScoreSet& s) {
    std::vector<std::size_t> idx(s.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto k = std::clamp<std::size_t>(
        static_cast<std::size_t>(fit_fraction * static_cast<double>(s.size())), 1,
        s.size() > 1 ? s.size() - 1 : 1);
    ScoreSet fit{s.kind, s.source_tag, {}}, rest{s.kind, s.source_tag, {}};
    for (std::size_t i = 0; i < idx.size(); ++i) {
      (i < k ? fit : rest).samples.push_back(s.samples[idx[i]]);
    }
    return std::pair{std::move(fit), std::move(rest)};
  };
  auto [fit_tr, rest_tr] = split(train);
  auto [fit_ho, rest_ho] = split(heldout);
  return {fit_mat(fit_tr, fit_ho), std::move(rest_tr), std::move(rest_ho)};
}

// ------------------------------------------------------ single-sample K-S

enum class SourceAssignment { kFirst, kSecond };

// d_KS between the Dirac mass at x and F: max(F(x-), 1 - F(x)).
inline double dirac_ks_distance(double x, const EmpiricalCdf& f) {
  return std::max(f.eval_left(x), 1.0 - f.eval(x));
}

// Assigns x to the nearer of F and G in K-S distance; ties go to F.
inline SourceAssignment ks_single_sample_decision(double x, const EmpiricalCdf& f,
                                                  const EmpiricalCdf& g) {
  return dirac_ks_distance(x, f) <= dirac_ks_distance(x, g) ? SourceAssignment::kFirst
                                                             : SourceAssignment::kSecond;
}

// ------------------------------------------------------------------ reports

enum class AttackMethod { kBayes, kMat, kKsSingle };

inline std::string_view to_string(AttackMethod m) {
  switch (m) {
    case AttackMethod::kBayes: return "bayes";
    case AttackMethod::kMat: return "mat";
    case AttackMethod::kKsSingle: return "ks_single";
  }
  return "unknown";
}

struct MembershipPrediction {
  std::string id;
  bool member = false;
  bool operator==(const MembershipPrediction&) const = default;
};

struct AttackReport {
  AttackMethod method = AttackMethod::kBayes;
  double accuracy = 0.0;
  std::vector<MembershipPrediction> per_sample;
};

// Runs `predict` on every member and non-member sample; accuracy is the
// fraction of correct calls over both sets.
template <typename Predict>
AttackReport evaluate_attack(AttackMethod method, const ScoreSet& members,
                             const ScoreSet& nonmembers, Predict&& predict) {
  AttackReport report;
  report.method = method;
  std::size_t correct = 0;
  for (const auto& s : members.samples) {
    const bool p = predict(s);
    correct += p ? 1 : 0;
    report.per_sample.push_back({s.id, p});
  }
  for (const auto& s : nonmembers.samples) {
    const bool p = predict(s);
    correct += p ? 0 : 1;
    report.per_sample.push_back({s.id, p});
  }
  const auto total = members.size() + nonmembers.size();
  if (total == 0) throw InputError("empty sample");
  report.accuracy = static_cast<double>(correct) / static_cast<double>(total);
  return report;
}

inline AttackReport run_bayes_attack(const ScoreSet& members, const ScoreSet& nonmembers) {
  return evaluate_attack(AttackMethod::kBayes, members, nonmembers,
                         [](const ScoreSample& s) { return bayes_predict(s); });
}

// Oracle-upper-bound MAT: tau fitted on the very sets under attack.
inline AttackReport run_mat_attack(const ScoreSet& members, const ScoreSet& nonmembers,
                                   MatModel* fitted = nullptr) {
  const MatModel model = fit_mat(members, nonmembers);
  if (fitted) *fitted = model;
  return evaluate_attack(AttackMethod::kMat, members, nonmembers,
                         [&](const ScoreSample& s) { return mat_predict(model, s.score); });
}

// Line-JSON: one header object, then one {"id","member"} object per sample.
inline void write_attack_report(const AttackReport& r, std::ostream& out) {
  nlohmann::json header = {{"method", std::string(to_string(r.method))},
                           {"accuracy", r.accuracy},
                           {"count", r.per_sample.size()}};
  out << header.dump() << '\n';
  for (const auto& p : r.per_sample) {
    out << nlohmann::json{{"id", p.id}, {"member", p.member}}.dump() << '\n';
  }
}

}  // namespace memaudit
