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

// Per-sample model outputs and their line-JSON file format.
//
//   {"format_version":1,"kind":"confidence","source_tag":"val"}
//   {"id":"img_0001","true_label":3,"pred_label":3,"score":0.9731}
//   ...
//
// The first line is the header. Every following non-blank line is one
// sample. Unknown fields are ignored. Scores are written in shortest
// round-trip decimal form so reading back is bit-exact.

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "memaudit/error.hpp"
#include "memaudit/stats.hpp"

namespace memaudit {

inline constexpr int kScoreFormatVersion = 1;

enum class ScoreKind { kConfidence, kLoss };

inline std::string_view to_string(ScoreKind kind) {
  return kind == ScoreKind::kConfidence ? "confidence" : "loss";
}

inline ScoreKind parse_score_kind(std::string_view s) {
  if (s == "confidence") return ScoreKind::kConfidence;
  if (s == "loss") return ScoreKind::kLoss;
  throw InputError("unknown score kind '" + std::string(s) + "'");
}

struct ScoreSample {
  std::string id;
  int true_label = -1;  // -1: unknown
  int pred_label = -1;  // -1: unknown
  double score = 0.0;

  bool operator==(const ScoreSample&) const = default;
};

struct ScoreSet {
  ScoreKind kind = ScoreKind::kConfidence;
  std::string source_tag;
  std::vector<ScoreSample> samples;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }

  std::vector<double> scores() const {
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(s.score);
    return out;
  }

  // Throws InputError("empty sample") for an empty set; that check belongs to
  // analysis time, not I/O time.
  EmpiricalCdf ecdf() const { return EmpiricalCdf(scores()); }

  bool operator==(const ScoreSet&) const = default;
};

inline void check_score_range(ScoreKind kind, const ScoreSample& s) {
  const bool ok = std::isfinite(s.score) &&
                  (kind == ScoreKind::kConfidence ? (s.score >= 0.0 && s.score <= 1.0)
                                                  : s.score >= 0.0);
  if (!ok) {
    std::ostringstream msg;
    msg << "score out of range for kind " << to_string(kind) << " in sample '" << s.id
        << "'";
    throw InputError(msg.str());
  }
}

// Range and id-uniqueness validation shared by the reader and writer.
inline void validate(const ScoreSet& set) {
  std::unordered_set<std::string_view> seen;
  for (const auto& s : set.samples) {
    check_score_range(set.kind, s);
    if (!seen.insert(s.id).second) throw InputError("duplicate id '" + s.id + "'");
  }
}

inline void require_same_kind(const ScoreSet& a, const ScoreSet& b) {
  if (a.kind != b.kind) {
    throw ArgumentError("score kind mismatch: " + std::string(to_string(a.kind)) + " vs " +
                        std::string(to_string(b.kind)));
  }
}

namespace detail {

[[noreturn]] inline void parse_fail(std::size_t line_no, const std::string& what) {
  throw InputError("line " + std::to_string(line_no) + ": " + what);
}

inline int read_label(const nlohmann::json& row, const char* key, std::size_t line_no) {
  auto it = row.find(key);
  if (it == row.end() || it->is_null()) return -1;
  if (!it->is_number_integer()) parse_fail(line_no, std::string("'") + key + "' must be an integer");
  const auto v = it->get<long long>();
  if (v < -1 || v > 1'000'000'000) parse_fail(line_no, std::string("'") + key + "' out of range");
  return static_cast<int>(v);
}

}  // namespace detail

inline ScoreSet read_scores(std::istream& in) {
  using nlohmann::json;
  ScoreSet set;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::unordered_set<std::string> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json row;
    try {
      row = json::parse(line);
    } catch (const json::exception& e) {
      detail::parse_fail(line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!row.is_object()) detail::parse_fail(line_no, "expected a JSON object");

    if (!have_header) {
      auto ver = row.find("format_version");
      if (ver == row.end() || !ver->is_number_integer()) {
        detail::parse_fail(line_no, "missing header field 'format_version'");
      }
      if (ver->get<int>() != kScoreFormatVersion) {
        detail::parse_fail(line_no, "unsupported format_version " + ver->dump());
      }
      auto kind = row.find("kind");
      if (kind == row.end() || !kind->is_string()) detail::parse_fail(line_no, "missing header field 'kind'");
      try {
        set.kind = parse_score_kind(kind->get<std::string>());
      } catch (const InputError& e) {
        detail::parse_fail(line_no, e.what());
      }
      auto tag = row.find("source_tag");
      if (tag != row.end() && tag->is_string()) set.source_tag = tag->get<std::string>();
      have_header = true;
      continue;
    }

    ScoreSample s;
    auto id = row.find("id");
    if (id == row.end() || !id->is_string()) detail::parse_fail(line_no, "missing string field 'id'");
    s.id = id->get<std::string>();
    auto score = row.find("score");
    if (score == row.end() || !score->is_number()) {
      detail::parse_fail(line_no, "missing numeric field 'score' in sample '" + s.id + "'");
    }
    s.score = score->get<double>();
    s.true_label = detail::read_label(row, "true_label", line_no);
    s.pred_label = detail::read_label(row, "pred_label", line_no);
    check_score_range(set.kind, s);
    if (!seen.insert(s.id).second) throw InputError("duplicate id '" + s.id + "'");
    set.samples.push_back(std::move(s));
  }
  if (!have_header) throw InputError("line 1: missing header");
  return set;
}

inline ScoreSet read_scores(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open score file '" + path + "'");
  return read_scores(in);
}

inline void write_scores(const ScoreSet& set, std::ostream& out) {
  using nlohmann::json;
  validate(set);
  json header = {{"format_version", kScoreFormatVersion},
                 {"kind", std::string(to_string(set.kind))},
                 {"source_tag", set.source_tag}};
  out << header.dump() << '\n';
  for (const auto& s : set.samples) {
    json row = {{"id", s.id}, {"true_label", s.true_label}, {"pred_label", s.pred_label},
                {"score", s.score}};
    out << row.dump() << '\n';
  }
  if (!out) throw Error("failed to write score file");
}

inline void write_scores(const ScoreSet& set, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_scores(set, out);
  out.flush();
  if (!out) throw Error("failed to write score file '" + path + "'");
}

}  // namespace memaudit
