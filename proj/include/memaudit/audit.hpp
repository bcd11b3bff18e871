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

// Dataset-level audits: which of two sources a batch of scores came from,
// and whether a validation set leaked into training.

#include <cmath>
#include <string_view>

#include "memaudit/scores.hpp"
#include "memaudit/stats.hpp"

namespace memaudit {

inline constexpr double kDefaultLeakageAlpha = 0.01;

enum class Source { kSource1, kSource2 };

inline std::string_view to_string(Source s) {
  return s == Source::kSource1 ? "source1" : "source2";
}

struct SourceInferenceResult {
  Source assigned = Source::kSource1;
  double d1 = 0.0;
  double d2 = 0.0;
  double margin = 0.0;
};

// Assigns `batch` to the reference whose score distribution is nearer in
// K-S distance. Ties go to source1.
inline SourceInferenceResult infer_source(const ScoreSet& batch, const ScoreSet& ref1,
                                          const ScoreSet& ref2) {
  require_same_kind(batch, ref1);
  require_same_kind(batch, ref2);
  const EmpiricalCdf b = batch.ecdf();
  SourceInferenceResult r;
  r.d1 = ks_distance(b, ref1.ecdf());
  r.d2 = ks_distance(b, ref2.ecdf());
  r.assigned = r.d1 <= r.d2 ? Source::kSource1 : Source::kSource2;
  r.margin = std::abs(r.d1 - r.d2);
  return r;
}

enum class LeakageVerdict { kLeakageDetected, kInconclusive };

inline std::string_view to_string(LeakageVerdict v) {
  return v == LeakageVerdict::kLeakageDetected ? "leakage_detected" : "inconclusive";
}

struct LeakageReport {
  KsTestResult ks;
  double alpha = kDefaultLeakageAlpha;
  LeakageVerdict verdict = LeakageVerdict::kInconclusive;
  std::size_t n_val = 0;
  std::size_t n_test = 0;
};

// Null hypothesis: validation and (leak-free) test scores share a
// distribution. Rejection means the validation set looks like training data.
inline LeakageReport detect_leakage(const ScoreSet& val, const ScoreSet& test,
                                    double alpha = kDefaultLeakageAlpha) {
  require_same_kind(val, test);
  LeakageReport r;
  r.alpha = alpha;
  r.ks = ks_two_sample_test(val.ecdf(), test.ecdf(), alpha);
  r.verdict = r.ks.reject_null ? LeakageVerdict::kLeakageDetected : LeakageVerdict::kInconclusive;
  r.n_val = val.size();
  r.n_test = test.size();
  return r;
}

}  // namespace memaudit
