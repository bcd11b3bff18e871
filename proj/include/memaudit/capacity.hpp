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

// Bits needed to single out n positives among N images, and the positive
// count at which that equals a network's parameter budget.

#include <cmath>
#include <cstdint>
#include <numbers>

#include "memaudit/error.hpp"

namespace memaudit {

// log2 binom(N, n). Small min(n, N-n) is summed term by term so that, e.g.,
// n = 1 gives log2(N) exactly; otherwise log-gamma.
inline double capacity_exact(std::uint64_t n, std::uint64_t N) {
  if (N < 1) throw ArgumentError("pool size N must be >= 1");
  if (n > N) throw ArgumentError("n must not exceed N");
  const std::uint64_t k = std::min(n, N - n);
  if (k == 0) return 0.0;
  if (k <= 64) {
    double bits = 0.0;
    for (std::uint64_t i = 1; i <= k; ++i) {
      bits += std::log2(static_cast<double>(N - k + i) / static_cast<double>(i));
    }
    return bits;
  }
  const double nd = static_cast<double>(n), Nd = static_cast<double>(N);
  return (std::lgamma(Nd + 1.0) - std::lgamma(nd + 1.0) - std::lgamma(Nd - nd + 1.0)) /
         std::numbers::ln2;
}

// n log2(N/n) + n / ln 2; meaningful for n << N.
inline double capacity_approx(std::uint64_t n, std::uint64_t N) {
  if (n == 0) return 0.0;
  if (n > N) throw ArgumentError("n must not exceed N");
  const double nd = static_cast<double>(n), Nd = static_cast<double>(N);
  return nd * std::log2(Nd / nd) + nd / std::numbers::ln2;
}

struct CapacityReport {
  std::uint64_t n = 0;
  std::uint64_t N = 0;
  double exact_bits = 0.0;
  double approx_bits = 0.0;
  double rel_error = 0.0;
};

inline CapacityReport capacity_report(std::uint64_t n, std::uint64_t N) {
  CapacityReport r;
  r.n = n;
  r.N = N;
  r.exact_bits = capacity_exact(n, N);
  r.approx_bits = capacity_approx(n, N);
  r.rel_error = std::abs(r.exact_bits - r.approx_bits) / std::max(r.exact_bits, 1.0);
  return r;
}

struct CapacityCrossover {
  std::uint64_t n_star = 0;         // smallest n with C(n) >= params
  std::uint64_t n_star_2bits = 0;   // smallest n with C(n) >= 2 * params
  bool two_bits_reachable = true;   // false if 2*params exceeds C(N/2)
};

namespace detail {

// Smallest n in [0, N/2] with C(n) >= bits (C is increasing there).
// Comparisons carry a 1e-12 relative slack for lgamma rounding.
inline std::uint64_t smallest_n_with_capacity(double bits, std::uint64_t N) {
  const double target = bits * (1.0 - 1e-12);
  std::uint64_t lo = 0, hi = N / 2;
  while (lo < hi) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (capacity_exact(mid, N) >= target) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

}  // namespace detail

inline CapacityCrossover capacity_crossover(std::uint64_t params, std::uint64_t N) {
  if (params < 1) throw ArgumentError("params must be >= 1");
  if (N < 2) throw ArgumentError("pool size N must be >= 2");
  const double peak = capacity_exact(N / 2, N);
  const double p = static_cast<double>(params);
  if (p * (1.0 - 1e-12) > peak) throw ArgumentError("pool too small");
  CapacityCrossover c;
  c.n_star = detail::smallest_n_with_capacity(p, N);
  if (2.0 * p * (1.0 - 1e-12) > peak) {
    c.two_bits_reachable = false;
    c.n_star_2bits = N / 2;
  } else {
    c.n_star_2bits = detail::smallest_n_with_capacity(2.0 * p, N);
  }
  return c;
}

}  // namespace memaudit
