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

// Line-JSON report records. Every record carries a "type" tag; to_json and
// from_json round-trip each result struct. format_table renders a list of
// records as an aligned text table.

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "memaudit/attacks.hpp"
#include "memaudit/audit.hpp"
#include "memaudit/capacity.hpp"
#include "memaudit/experiments.hpp"
#include "memaudit/stats.hpp"

namespace memaudit {

using Json = nlohmann::json;

namespace detail {

inline void expect_type(const Json& j, std::string_view type) {
  if (!j.contains("type") || j.at("type").get<std::string>() != type) {
    throw InputError("expected a '" + std::string(type) + "' record");
  }
}

inline Source parse_source(std::string_view s) {
  if (s == "source1") return Source::kSource1;
  if (s == "source2") return Source::kSource2;
  throw InputError("unknown source '" + std::string(s) + "'");
}

inline LeakageVerdict parse_verdict(std::string_view s) {
  if (s == "leakage_detected") return LeakageVerdict::kLeakageDetected;
  if (s == "inconclusive") return LeakageVerdict::kInconclusive;
  throw InputError("unknown verdict '" + std::string(s) + "'");
}

inline ThresholdDirection parse_direction(std::string_view s) {
  if (s == "member_if_below") return ThresholdDirection::kMemberIfBelow;
  if (s == "member_if_above") return ThresholdDirection::kMemberIfAbove;
  throw InputError("unknown direction '" + std::string(s) + "'");
}

}  // namespace detail

// ------------------------------------------------------------ core stats

inline void to_json(Json& j, const KsTestResult& r) {
  j = {{"type", "ks_test"}, {"distance", r.distance}, {"threshold", r.threshold}, {"p_value", r.p_value},
       {"reject_null", r.reject_null}, {"n", r.n}, {"m", r.m}};
}

inline void from_json(const Json& j, KsTestResult& r) {
  detail::expect_type(j, "ks_test");
  r.distance = j.at("distance").get<double>();
  r.threshold = j.at("threshold").get<double>();
  r.p_value = j.at("p_value").get<double>();
  r.reject_null = j.at("reject_null").get<bool>();
  r.n = j.at("n").get<std::size_t>();
  r.m = j.at("m").get<std::size_t>();
}

inline void to_json(Json& j, const LeakageReport& r) {
  j = {{"type", "leakage"}, {"verdict", std::string(to_string(r.verdict))}, {"alpha", r.alpha},
       {"distance", r.ks.distance}, {"threshold", r.ks.threshold}, {"p_value", r.ks.p_value},
       {"n_val", r.n_val}, {"n_test", r.n_test}};
}

inline void from_json(const Json& j, LeakageReport& r) {
  detail::expect_type(j, "leakage");
  r.verdict = detail::parse_verdict(j.at("verdict").get<std::string>());
  r.alpha = j.at("alpha").get<double>();
  r.ks.distance = j.at("distance").get<double>();
  r.ks.threshold = j.at("threshold").get<double>();
  r.ks.p_value = j.at("p_value").get<double>();
  r.ks.reject_null = r.verdict == LeakageVerdict::kLeakageDetected;
  r.n_val = r.ks.n = j.at("n_val").get<std::size_t>();
  r.n_test = r.ks.m = j.at("n_test").get<std::size_t>();
}

inline void to_json(Json& j, const SourceInferenceResult& r) {
  j = {{"type", "source_inference"}, {"assigned", std::string(to_string(r.assigned))},
       {"d1", r.d1}, {"d2", r.d2}, {"margin", r.margin}};
}

inline void from_json(const Json& j, SourceInferenceResult& r) {
  detail::expect_type(j, "source_inference");
  r.assigned = detail::parse_source(j.at("assigned").get<std::string>());
  r.d1 = j.at("d1").get<double>();
  r.d2 = j.at("d2").get<double>();
  r.margin = j.at("margin").get<double>();
}

// --------------------------------------------------------------- attacks

inline void to_json(Json& j, const MatModel& m) {
  j = {{"type", "mat_model"}, {"tau", m.tau}, {"direction", std::string(to_string(m.direction))},
       {"est_accuracy", m.est_accuracy}, {"kind", std::string(to_string(m.kind))}};
}

inline void from_json(const Json& j, MatModel& m) {
  detail::expect_type(j, "mat_model");
  m.tau = j.at("tau").get<double>();
  m.direction = detail::parse_direction(j.at("direction").get<std::string>());
  m.est_accuracy = j.at("est_accuracy").get<double>();
  m.kind = parse_score_kind(j.at("kind").get<std::string>());
}

// Header record of an attack report; per-sample rows follow as
// {"type":"membership","id":..,"member":..}.
inline Json attack_header(const AttackReport& r) {
  return {{"type", "attack"}, {"method", std::string(to_string(r.method))}, {"accuracy", r.accuracy},
          {"count", r.per_sample.size()}};
}

inline std::vector<Json> attack_records(const AttackReport& r) {
  std::vector<Json> out{attack_header(r)};
  for (const auto& p : r.per_sample) out.push_back({{"type", "membership"}, {"id", p.id}, {"member", p.member}});
  return out;
}

// -------------------------------------------------------------- capacity

inline void to_json(Json& j, const CapacityReport& r) {
  j = {{"type", "capacity_bits"}, {"n", r.n}, {"N", r.N}, {"exact_bits", r.exact_bits},
       {"approx_bits", r.approx_bits}, {"rel_error", r.rel_error}};
}

inline void from_json(const Json& j, CapacityReport& r) {
  detail::expect_type(j, "capacity_bits");
  r.n = j.at("n").get<std::uint64_t>();
  r.N = j.at("N").get<std::uint64_t>();
  r.exact_bits = j.at("exact_bits").get<double>();
  r.approx_bits = j.at("approx_bits").get<double>();
  r.rel_error = j.at("rel_error").get<double>();
}

struct CapacitySummary {
  std::uint64_t params = 0;
  std::uint64_t pool = 0;
  CapacityCrossover crossover;
};

inline void to_json(Json& j, const CapacitySummary& s) {
  j = {{"type", "capacity"}, {"params", s.params}, {"pool", s.pool}, {"n_star", s.crossover.n_star},
       {"n_star_2bits", s.crossover.n_star_2bits}, {"two_bits_reachable", s.crossover.two_bits_reachable}};
}

inline void from_json(const Json& j, CapacitySummary& s) {
  detail::expect_type(j, "capacity");
  s.params = j.at("params").get<std::uint64_t>();
  s.pool = j.at("pool").get<std::uint64_t>();
  s.crossover.n_star = j.at("n_star").get<std::uint64_t>();
  s.crossover.n_star_2bits = j.at("n_star_2bits").get<std::uint64_t>();
  s.crossover.two_bits_reachable = j.at("two_bits_reachable").get<bool>();
}

// ----------------------------------------------------------- experiments

inline void to_json(Json& j, const MemorizationPoint& p) {
  j = {{"type", "memorization_point"}, {"n", p.n}, {"mode", std::string(to_string(p.mode))},
       {"seed", p.seed}, {"balanced_accuracy", p.balanced_accuracy}, {"tpr", p.true_positive_rate},
       {"tnr", p.true_negative_rate}, {"epochs", p.epochs_to_converge}};
}

inline void from_json(const Json& j, MemorizationPoint& p) {
  detail::expect_type(j, "memorization_point");
  p.n = j.at("n").get<std::size_t>();
  p.mode = parse_augmentation(j.at("mode").get<std::string>());
  p.seed = j.at("seed").get<std::uint64_t>();
  p.balanced_accuracy = j.at("balanced_accuracy").get<double>();
  p.true_positive_rate = j.at("tpr").get<double>();
  p.true_negative_rate = j.at("tnr").get<double>();
  p.epochs_to_converge = j.at("epochs").get<int>();
}

inline Json curve_summary(const MemorizationCurve& c) {
  return {{"type", "memorization_curve"}, {"param_count", c.param_count}, {"pool_size", c.pool_size},
          {"crossover_n", c.crossover_n}, {"crossover_n_2bits", c.crossover_n_2bits},
          {"points", c.points.size()}};
}

inline void to_json(Json& j, const LeakageRow& r) {
  j = {{"type", "leakage_row"}, {"s", r.leaked_per_class}, {"seed", r.seed}, {"report", r.report}};
}

inline void from_json(const Json& j, LeakageRow& r) {
  detail::expect_type(j, "leakage_row");
  r.leaked_per_class = j.at("s").get<int>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.report = j.at("report").get<LeakageReport>();
}

inline void to_json(Json& j, const FinalAttackRow& r) {
  j = {{"type", "attack_final"}, {"mode", std::string(to_string(r.mode))}, {"seed", r.seed},
       {"p_train", r.train_accuracy}, {"p_test", r.heldout_accuracy}, {"bayes", r.bayes},
       {"mat", r.mat}, {"mat_model", r.mat_model}};
}

inline void from_json(const Json& j, FinalAttackRow& r) {
  detail::expect_type(j, "attack_final");
  r.mode = parse_augmentation(j.at("mode").get<std::string>());
  r.seed = j.at("seed").get<std::uint64_t>();
  r.train_accuracy = j.at("p_train").get<double>();
  r.heldout_accuracy = j.at("p_test").get<double>();
  r.bayes = j.at("bayes").get<double>();
  r.mat = j.at("mat").get<double>();
  r.mat_model = j.at("mat_model").get<MatModel>();
}

inline void to_json(Json& j, const PartialAttackRow& r) {
  j = {{"type", "attack_partial"}, {"mode", std::string(to_string(r.mode))}, {"seed", r.seed},
       {"cut", r.cut}, {"mat", r.mat}, {"bayes", r.bayes}};
}

inline void from_json(const Json& j, PartialAttackRow& r) {
  detail::expect_type(j, "attack_partial");
  r.mode = parse_augmentation(j.at("mode").get<std::string>());
  r.seed = j.at("seed").get<std::uint64_t>();
  r.cut = j.at("cut").get<std::string>();
  r.mat = j.at("mat").get<double>();
  r.bayes = j.at("bayes").get<double>();
}

// Shadow results are reported without the fitted matrices.
struct ShadowSummary {
  AugmentationMode mode = AugmentationMode::kNone;
  std::uint64_t seed = 0;
  int count = 0;
  std::string cut;
  ShadowFeatures features = ShadowFeatures::kProbe;
  double accuracy = 0.0;
  double attack_train_accuracy = 0.0;
  std::vector<double> alignment_residuals;
  int damped_alignments = 0;
};

inline ShadowSummary summarize(const ShadowResult& r) {
  ShadowSummary s{r.mode, r.seed, r.ensemble.count, r.ensemble.cut, r.ensemble.features,
                  r.accuracy, r.attack_train_accuracy, {}, 0};
  for (const auto& m : r.ensemble.alignment) {
    s.alignment_residuals.push_back(m.relative_residual);
    s.damped_alignments += m.damped ? 1 : 0;
  }
  return s;
}

inline void to_json(Json& j, const ShadowSummary& s) {
  j = {{"type", "shadow"}, {"mode", std::string(to_string(s.mode))}, {"seed", s.seed},
       {"count", s.count}, {"cut", s.cut}, {"features", std::string(to_string(s.features))},
       {"accuracy", s.accuracy}, {"attack_train_accuracy", s.attack_train_accuracy},
       {"alignment_residuals", s.alignment_residuals}, {"damped_alignments", s.damped_alignments}};
}

inline void from_json(const Json& j, ShadowSummary& s) {
  detail::expect_type(j, "shadow");
  s.mode = parse_augmentation(j.at("mode").get<std::string>());
  s.seed = j.at("seed").get<std::uint64_t>();
  s.count = j.at("count").get<int>();
  s.cut = j.at("cut").get<std::string>();
  s.features = parse_shadow_features(j.at("features").get<std::string>());
  s.accuracy = j.at("accuracy").get<double>();
  s.attack_train_accuracy = j.at("attack_train_accuracy").get<double>();
  s.alignment_residuals = j.at("alignment_residuals").get<std::vector<double>>();
  s.damped_alignments = j.at("damped_alignments").get<int>();
}

// ------------------------------------------------------------ line-JSON

inline void write_records(const std::vector<Json>& records, std::ostream& out) {
  for (const auto& r : records) out << r.dump() << '\n';
}

inline std::vector<Json> read_records(std::istream& in) {
  std::vector<Json> out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(Json::parse(line));
    } catch (const Json::exception& e) {
      throw InputError("line " + std::to_string(number) + ": " + e.what());
    }
  }
  return out;
}

namespace detail {

inline std::string cell(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) {
    std::ostringstream s;
    s.precision(6);
    s << v.get<double>();
    return s.str();
  }
  if (v.is_object()) return "{...}";
  return v.dump();
}

}  // namespace detail

// Aligned text table over flat records; the columns are the union of keys
// in first-seen order, "type" first.
inline std::string format_table(const std::vector<Json>& records) {
  std::vector<std::string> columns;
  for (const auto& r : records) {
    if (!r.is_object()) continue;
    for (const auto& [k, v] : r.items()) {
      if (std::find(columns.begin(), columns.end(), k) == columns.end()) columns.push_back(k);
    }
  }
  auto type = std::find(columns.begin(), columns.end(), "type");
  if (type != columns.end()) std::rotate(columns.begin(), type, type + 1);
  std::vector<std::vector<std::string>> rows{columns};
  for (const auto& r : records) {
    std::vector<std::string> row;
    for (const auto& c : columns) row.push_back(r.is_object() && r.contains(c) ? detail::cell(r.at(c)) : "");
    rows.push_back(std::move(row));
  }
  std::vector<std::size_t> width(columns.size(), 0);
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  }
  std::ostringstream out;
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out << row[i];
      if (i + 1 < row.size()) out << std::string(width[i] - row[i].size() + 2, ' ');
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace memaudit
