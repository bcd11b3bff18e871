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

// Building blocks of the shadow-model attack: least-squares alignment of one
// network's activations onto another's, and a logistic membership classifier.

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "memaudit/error.hpp"

namespace memaudit {

// target ~= matrix * source + offset, activations stored one sample per column.
struct LinearMap {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd offset;
  double relative_residual = 0.0;  // ||fit - target||_F / ||target - mean||_F
  bool damped = false;             // ridge damping was needed (rank-deficient design)
  double ridge = 0.0;

  Eigen::MatrixXd apply(const Eigen::MatrixXd& source) const {
    Eigen::MatrixXd out = matrix * source;
    out.colwise() += offset;
    return out;
  }
};

// Least-squares fit over paired columns. A rank-deficient design is solved
// with ridge damping 1e-6 * mean diagonal of the Gram matrix and flagged.
inline LinearMap fit_alignment(const Eigen::MatrixXd& source, const Eigen::MatrixXd& target) {
  if (source.cols() != target.cols()) throw ArgumentError("alignment needs paired samples");
  if (source.cols() < 2) throw ArgumentError("alignment needs at least two samples");
  const Eigen::Index n = source.cols(), d = source.rows();
  // Design with a trailing column of ones for the offset.
  Eigen::MatrixXd x(n, d + 1);
  x.leftCols(d) = source.transpose();
  x.col(d).setOnes();
  const Eigen::MatrixXd y = target.transpose();

  LinearMap map;
  Eigen::MatrixXd coef;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() == x.cols()) {
    coef = qr.solve(y);
  } else {
    Eigen::MatrixXd gram = x.transpose() * x;
    map.ridge = 1e-6 * std::max(gram.diagonal().mean(), 1e-12);
    gram.diagonal().array() += map.ridge;
    coef = gram.ldlt().solve(x.transpose() * y);
    map.damped = true;
  }
  map.matrix = coef.topRows(d).transpose();
  map.offset = coef.row(d).transpose();
  const Eigen::MatrixXd fit = map.apply(source);
  const Eigen::MatrixXd centered = target.colwise() - target.rowwise().mean();
  const double denom = centered.norm();
  map.relative_residual = denom > 0 ? (fit - target).norm() / denom : (fit - target).norm();
  return map;
}

// P(member | x) = sigmoid(w . standardize(x) + b).
struct LogisticModel {
  Eigen::VectorXd mean, inv_std, weights;
  double bias = 0.0;

  Eigen::VectorXd probabilities(const Eigen::MatrixXd& features) const {
    Eigen::MatrixXd z = (features.colwise() - mean).array().colwise() * inv_std.array();
    Eigen::VectorXd logits = (z.transpose() * weights).array() + bias;
    return logits.unaryExpr([](double t) { return 1.0 / (1.0 + std::exp(-t)); });
  }
};

// L2-regularized logistic regression by Newton iterations on standardized
// features (one sample per column, labels in {0, 1}).
inline LogisticModel fit_logistic(const Eigen::MatrixXd& features, const std::vector<int>& labels,
                                  double l2 = 1e-2, int iterations = 30) {
  const Eigen::Index d = features.rows(), n = features.cols();
  if (static_cast<std::size_t>(n) != labels.size() || n == 0) throw ArgumentError("label count mismatch");
  LogisticModel m;
  m.mean = features.rowwise().mean();
  const Eigen::MatrixXd centered = features.colwise() - m.mean;
  const Eigen::VectorXd var = centered.array().square().rowwise().mean();
  m.inv_std = var.unaryExpr([](double v) { return v > 1e-12 ? 1.0 / std::sqrt(v) : 0.0; });
  // Augmented design: standardized features plus a ones row.
  Eigen::MatrixXd z(d + 1, n);
  z.topRows(d) = centered.array().colwise() * m.inv_std.array();
  z.row(d).setOnes();
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y(i) = labels[static_cast<std::size_t>(i)] ? 1.0 : 0.0;

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(d + 1);
  Eigen::VectorXd reg = Eigen::VectorXd::Constant(d + 1, l2 * static_cast<double>(n));
  reg(d) = 0.0;
  for (int it = 0; it < iterations; ++it) {
    const Eigen::VectorXd p =
        (z.transpose() * theta).unaryExpr([](double t) { return 1.0 / (1.0 + std::exp(-t)); });
    const Eigen::VectorXd grad = z * (p - y) + reg.cwiseProduct(theta);
    const Eigen::VectorXd w = (p.array() * (1.0 - p.array())).max(1e-9);
    Eigen::MatrixXd hess = z * w.asDiagonal() * z.transpose();
    hess.diagonal() += reg;
    hess.diagonal().array() += 1e-9;
    const Eigen::VectorXd step = hess.ldlt().solve(grad);
    theta -= step;
    if (step.norm() < 1e-10) break;
  }
  m.weights = theta.head(d);
  m.bias = theta(d);
  return m;
}

// One-vs-rest least-squares class probe over activations. Per-sample
// features are the score of the true class and its margin over the best
// other class.
struct ClassProbe {
  Eigen::MatrixXd weights;  // K x (d + 1), last column is the offset

  Eigen::MatrixXd scores(const Eigen::MatrixXd& features) const {
    const Eigen::Index d = weights.cols() - 1;
    if (features.rows() != d) throw ArgumentError("probe feature dimension mismatch");
    Eigen::MatrixXd out = weights.leftCols(d) * features;
    out.colwise() += weights.col(d);
    return out;
  }

  Eigen::MatrixXd margins(const Eigen::MatrixXd& features, std::span<const int> labels) const {
    if (static_cast<std::size_t>(features.cols()) != labels.size()) throw ArgumentError("label count mismatch");
    const Eigen::MatrixXd s = scores(features);
    Eigen::MatrixXd out(2, features.cols());
    for (Eigen::Index i = 0; i < s.cols(); ++i) {
      const int y = labels[static_cast<std::size_t>(i)];
      if (y < 0 || y >= s.rows()) throw ArgumentError("label index out of range");
      double other = -std::numeric_limits<double>::infinity();
      for (Eigen::Index k = 0; k < s.rows(); ++k) {
        if (k != y) other = std::max(other, s(k, i));
      }
      out(0, i) = s(y, i);
      out(1, i) = s(y, i) - other;
    }
    return out;
  }
};

// Ridge regression onto one-hot targets; the damping is `ridge` times the
// mean diagonal of the Gram matrix.
inline ClassProbe fit_class_probe(const Eigen::MatrixXd& features, std::span<const int> labels,
                                  int num_classes, double ridge = 0.1) {
  const Eigen::Index d = features.rows(), n = features.cols();
  if (static_cast<std::size_t>(n) != labels.size() || n == 0) throw ArgumentError("label count mismatch");
  if (num_classes < 2) throw ArgumentError("need at least two classes");
  Eigen::MatrixXd z(d + 1, n);
  z.topRows(d) = features;
  z.row(d).setOnes();
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(num_classes, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int c = labels[static_cast<std::size_t>(i)];
    if (c < 0 || c >= num_classes) throw ArgumentError("label index out of range");
    y(c, i) = 1.0;
  }
  Eigen::MatrixXd gram = z * z.transpose();
  gram.diagonal().array() += ridge * std::max(gram.diagonal().mean(), 1e-12);
  ClassProbe probe;
  probe.weights = gram.ldlt().solve(z * y.transpose()).transpose();
  return probe;
}

}  // namespace memaudit
