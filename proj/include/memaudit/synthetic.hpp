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

// Deterministic synthetic image corpora: smooth colored noise built from
// random low-frequency Fourier coefficients, and a K-class variant where
// each class has a prototype coefficient tensor.

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "memaudit/error.hpp"
#include "memaudit/image.hpp"

namespace memaudit {

// splitmix64 finalizer; derives independent stream seeds from (seed, index).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Renders images from per-channel (2F+1)x(2F+1) coefficient grids over the
// real Fourier basis {1, cos(2 pi u t / S), sin(2 pi u t / S)}, u = 1..F,
// then squashes with 0.5 + 0.5 softsign(gain * v) into (0, 1).
class FourierRenderer {
 public:
  explicit FourierRenderer(int max_freq = 4, ImageShape shape = {}, double gain = 1.0)
      : max_freq_(max_freq), shape_(shape), gain_(gain) {
    if (max_freq < 0) throw ArgumentError("max_freq must be >= 0");
    const int nb = basis_size();
    fill_basis(basis_y_, shape.height);
    fill_basis(basis_x_, shape.width);
    // Coefficient std 1/sqrt(1 + fi^2 + fj^2), normalized so that the
    // rendered pre-squash value has unit variance.
    scale_.resize(static_cast<std::size_t>(nb) * nb);
    double total = 0.0;
    for (int i = 0; i < nb; ++i) {
      for (int j = 0; j < nb; ++j) {
        const double fi = freq(i), fj = freq(j);
        const double var = 1.0 / (1.0 + fi * fi + fj * fj);
        scale_[static_cast<std::size_t>(i) * nb + j] = var;
        total += var;
      }
    }
    for (auto& s : scale_) s = std::sqrt(s / total);
  }

  int basis_size() const { return 2 * max_freq_ + 1; }
  std::size_t coefficient_count() const {
    return static_cast<std::size_t>(shape_.channels) * basis_size() * basis_size();
  }
  const ImageShape& shape() const { return shape_; }

  // Unit-variance-per-image random coefficients.
  template <typename Rng>
  std::vector<double> sample_coefficients(Rng& rng) const {
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::size_t per_channel = scale_.size();
    std::vector<double> coeffs(coefficient_count());
    for (std::size_t k = 0; k < coeffs.size(); ++k) coeffs[k] = normal(rng) * scale_[k % per_channel];
    return coeffs;
  }

  Image render(const std::vector<double>& coeffs) const {
    if (coeffs.size() != coefficient_count()) throw ArgumentError("coefficient count mismatch");
    const int nb = basis_size();
    const int h = shape_.height, w = shape_.width;
    Image img(shape_);
    auto pixels = img.data();
    for (int c = 0; c < shape_.channels; ++c) {
      // Coefficients are stored row-major per channel: a[i][j], i over y.
      Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> a(
          coeffs.data() + static_cast<std::size_t>(c) * nb * nb, nb, nb);
      // plane(y, x) = sum_ij By[i][y] a[i][j] Bx[j][x], stored row-major (y, x).
      const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> plane =
          basis_y_.transpose() * a * basis_x_;
      float* out = pixels.data() + static_cast<std::size_t>(c) * h * w;
      for (Eigen::Index k = 0; k < plane.size(); ++k) {
        const double v = gain_ * plane.data()[k];
        out[k] = static_cast<float>(0.5 + 0.5 * v / (1.0 + std::abs(v)));
      }
    }
    return img;
  }

 private:
  double freq(int i) const { return static_cast<double>((i + 1) / 2); }

  void fill_basis(Eigen::MatrixXd& basis, int size) const {
    const int nb = basis_size();
    basis.resize(nb, size);
    for (int i = 0; i < nb; ++i) {
      for (int t = 0; t < size; ++t) {
        const double phase = 2.0 * std::numbers::pi * freq(i) * t / size;
        double v = 1.0;
        if (i > 0) v = std::numbers::sqrt2 * ((i % 2 == 1) ? std::cos(phase) : std::sin(phase));
        basis(i, t) = v;
      }
    }
  }

  int max_freq_;
  ImageShape shape_;
  double gain_;
  Eigen::MatrixXd basis_y_, basis_x_;  // basis_size x extent
  std::vector<double> scale_;
};

// Random-access pool of N independent smooth-noise images; image i depends
// only on (seed, i).
class SmoothNoisePool {
 public:
  SmoothNoisePool(std::uint64_t seed, std::size_t size, int max_freq = 4)
      : seed_(seed), size_(size), renderer_(max_freq) {}

  std::size_t size() const { return size_; }

  Image operator[](std::size_t index) const {
    if (index >= size_) throw ArgumentError("pool index out of range");
    std::mt19937_64 rng(mix_seed(seed_, index));
    return renderer_.render(renderer_.sample_coefficients(rng));
  }

 private:
  std::uint64_t seed_;
  std::size_t size_;
  FourierRenderer renderer_;
};

struct LabeledImage {
  Image image;
  int label = 0;
  std::string id;
};

// Per-image nuisance pose: a random horizontal mirror and a random circular
// shift of up to `shift` pixels on each axis.
struct PoseJitter {
  bool flip = false;
  int shift = 0;
};

inline Image circular_view(const Image& src, bool flip, int dx, int dy) {
  const ImageShape& s = src.shape();
  Image out(s);
  for (int c = 0; c < s.channels; ++c) {
    for (int y = 0; y < s.height; ++y) {
      const int sy = ((y - dy) % s.height + s.height) % s.height;
      for (int x = 0; x < s.width; ++x) {
        int sx = ((x - dx) % s.width + s.width) % s.width;
        if (flip) sx = s.width - 1 - sx;
        out.at(c, y, x) = src.at(c, sy, sx);
      }
    }
  }
  return out;
}

// K-class corpus: coefficients = separation * prototype[k] + noise, with
// prototypes and noise drawn from the same smooth spectrum, rendered under a
// random pose.
class SyntheticClasses {
 public:
  SyntheticClasses(std::uint64_t seed, int num_classes, double separation, int max_freq = 4,
                   PoseJitter pose = {})
      : seed_(seed), separation_(separation), renderer_(max_freq), pose_(pose) {
    if (num_classes < 2) throw ArgumentError("need at least two classes");
    if (pose.shift < 0) throw ArgumentError("pose shift must be >= 0");
    std::mt19937_64 rng(mix_seed(seed, 0xC1A55ULL));
    for (int k = 0; k < num_classes; ++k) prototypes_.push_back(renderer_.sample_coefficients(rng));
  }

  int num_classes() const { return static_cast<int>(prototypes_.size()); }

  // Deterministic in (seed, label, index).
  Image sample(int label, std::uint64_t index) const {
    if (label < 0 || label >= num_classes()) throw ArgumentError("class label out of range");
    std::mt19937_64 rng(mix_seed(mix_seed(seed_, static_cast<std::uint64_t>(label)), index));
    std::vector<double> c = renderer_.sample_coefficients(rng);
    const auto& p = prototypes_[static_cast<std::size_t>(label)];
    for (std::size_t k = 0; k < c.size(); ++k) c[k] = separation_ * p[k] + c[k];
    Image img = renderer_.render(c);
    if (!pose_.flip && pose_.shift == 0) return img;
    const bool flip = pose_.flip && std::bernoulli_distribution(0.5)(rng);
    std::uniform_int_distribution<int> shift(-pose_.shift, pose_.shift);
    const int dx = shift(rng);
    const int dy = shift(rng);
    return circular_view(img, flip, dx, dy);
  }

  // `per_class` images of every class, indices [first, first + per_class).
  std::vector<LabeledImage> make_split(const std::string& tag, std::uint64_t first,
                                       int per_class) const {
    std::vector<LabeledImage> out;
    out.reserve(static_cast<std::size_t>(per_class) * prototypes_.size());
    for (int k = 0; k < num_classes(); ++k) {
      for (int i = 0; i < per_class; ++i) {
        const std::uint64_t idx = first + static_cast<std::uint64_t>(i);
        out.push_back({sample(k, idx), k, tag + "_c" + std::to_string(k) + "_" + std::to_string(idx)});
      }
    }
    return out;
  }

 private:
  std::uint64_t seed_;
  double separation_;
  FourierRenderer renderer_;
  PoseJitter pose_;
  std::vector<std::vector<double>> prototypes_;
};

}  // namespace memaudit
