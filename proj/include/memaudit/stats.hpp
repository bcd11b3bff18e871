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

// Empirical distributions and the two-sample Kolmogorov-Smirnov machinery
// that every audit in this library is built on.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <span>
#include <utility>
#include <vector>

#include "memaudit/error.hpp"

namespace memaudit {

// Step-function CDF of a finite multiset of reals. Duplicates are kept and
// counted with multiplicity.
class EmpiricalCdf {
 public:
  // Throws InputError("empty sample") / InputError("invalid score").
  explicit EmpiricalCdf(std::vector<double> samples) : values_(std::move(samples)) {
    if (values_.empty()) throw InputError("empty sample");
    for (double v : values_) {
      if (!std::isfinite(v)) throw InputError("invalid score");
    }
    std::sort(values_.begin(), values_.end());
  }

  // F(x) = #{v <= x} / n.
  double operator()(double x) const { return static_cast<double>(count_le(x)) / size(); }
  double eval(double x) const { return (*this)(x); }

  // Left limit F(x-) = #{v < x} / n.
  double eval_left(double x) const { return static_cast<double>(count_lt(x)) / size(); }

  std::size_t count_le(double x) const {
    return static_cast<std::size_t>(std::upper_bound(values_.begin(), values_.end(), x) -
                                    values_.begin());
  }
  std::size_t count_lt(double x) const {
    return static_cast<std::size_t>(std::lower_bound(values_.begin(), values_.end(), x) -
                                    values_.begin());
  }

  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double min() const { return values_.front(); }
  double max() const { return values_.back(); }

 private:
  std::vector<double> values_;
};

inline EmpiricalCdf build_ecdf(std::span<const double> samples) {
  return EmpiricalCdf(std::vector<double>(samples.begin(), samples.end()));
}

// sup_x |F(x) - G(x)|. Both CDFs are constant between merged sample points,
// so walking the merged order and comparing right-continuous values at each
// distinct point covers every left limit as well. The difference is kept as
// an integer numerator over n*m until the final division.
inline double ks_distance(const EmpiricalCdf& f, const EmpiricalCdf& g) {
  const auto a = f.values();
  const auto b = g.values();
  const auto n = static_cast<std::int64_t>(a.size());
  const auto m = static_cast<std::int64_t>(b.size());
  std::int64_t i = 0, j = 0, best = 0;
  while (i < n || j < m) {
    double v;
    if (j >= m || (i < n && a[i] <= b[j])) {
      v = a[i];
    } else {
      v = b[j];
    }
    while (i < n && a[i] <= v) ++i;
    while (j < m && b[j] <= v) ++j;
    best = std::max<std::int64_t>(best, std::abs(i * m - j * n));
  }
  return static_cast<double>(best) / (static_cast<double>(n) * static_cast<double>(m));
}

// c(alpha) = sqrt(-ln(alpha/2) / 2).
inline double smirnov_constant(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");
  return std::sqrt(-0.5 * std::log(alpha / 2.0));
}

// Large-sample rejection threshold on the K-S distance at level alpha.
inline double smirnov_threshold(double alpha, std::size_t n, std::size_t m) {
  if (n == 0 || m == 0) throw ArgumentError("sample sizes must be positive");
  const double nd = static_cast<double>(n), md = static_cast<double>(m);
  return smirnov_constant(alpha) * std::sqrt((nd + md) / (nd * md));
}

// Inverse of smirnov_threshold in alpha: p(d) = 2 exp(-2 d^2 nm/(n+m)),
// clipped to [0, 1].
inline double smirnov_p_value(double distance, std::size_t n, std::size_t m) {
  const double nd = static_cast<double>(n), md = static_cast<double>(m);
  const double p = 2.0 * std::exp(-2.0 * distance * distance * nd * md / (nd + md));
  return std::clamp(p, 0.0, 1.0);
}

struct KsTestResult {
  double distance = 0.0;
  double threshold = 0.0;
  double p_value = 1.0;
  bool reject_null = false;
  std::size_t n = 0;
  std::size_t m = 0;
};

inline KsTestResult ks_two_sample_test(const EmpiricalCdf& a, const EmpiricalCdf& b,
                                       double alpha) {
  KsTestResult r;
  r.n = a.size();
  r.m = b.size();
  r.distance = ks_distance(a, b);
  r.threshold = smirnov_threshold(alpha, r.n, r.m);
  r.p_value = smirnov_p_value(r.distance, r.n, r.m);
  r.reject_null = r.distance > r.threshold;
  return r;
}

}  // namespace memaudit
