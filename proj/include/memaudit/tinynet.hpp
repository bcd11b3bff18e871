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

// TinyNet: small conv/ReLU/fully-connected networks trained from scratch.
//
// Activations are stored as (channels x batch*height*width) column-major
// matrices, i.e. each pixel's channel vector is contiguous. Convolutions are
// im2col + GEMM with weights laid out as (out_channels x kernel*kernel*in)
// where the patch order is (ky, kx, c). Flattening a conv output for the
// fully-connected layers is then a reinterpretation of the same memory.
//
// The network is templated on its scalar type so that the float model used
// for training and a double copy used for gradient checks share one code path.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "memaudit/error.hpp"
#include "memaudit/image.hpp"
#include "memaudit/synthetic.hpp"

namespace memaudit {

// Parameter storage with a fixed base alignment, so that vectorized
// reductions round identically from run to run.
template <typename T>
using AlignedVector = std::vector<T, Eigen::aligned_allocator<T>>;

enum class TinyNetVariant { kT1, kT2, kT3, kCustom };

inline std::string_view to_string(TinyNetVariant v) {
  switch (v) {
    case TinyNetVariant::kT1: return "T1";
    case TinyNetVariant::kT2: return "T2";
    case TinyNetVariant::kT3: return "T3";
    case TinyNetVariant::kCustom: return "custom";
  }
  return "custom";
}

inline TinyNetVariant parse_variant(std::string_view s) {
  if (s == "T1") return TinyNetVariant::kT1;
  if (s == "T2") return TinyNetVariant::kT2;
  if (s == "T3") return TinyNetVariant::kT3;
  if (s == "custom") return TinyNetVariant::kCustom;
  throw InputError("unknown TinyNet variant '" + std::string(s) + "'");
}

struct ConvSpec {
  int out_channels = 8;
  int kernel = 3;
  int stride = 1;
  int padding = -1;  // -1: kernel / 2

  int effective_padding() const { return padding < 0 ? kernel / 2 : padding; }
  bool operator==(const ConvSpec&) const = default;
};

struct TinyNetConfig {
  TinyNetVariant variant = TinyNetVariant::kCustom;
  std::vector<ConvSpec> convs;
  std::vector<int> fc_widths;  // hidden fully-connected widths; the output layer is implicit
  ImageShape input_shape{};
  int output_dim = 2;
  std::uint64_t seed = 0;
  // Fixed input standardization: the first layer sees (x - input_mean) / input_std.
  float input_mean = 0.5f;
  float input_std = 0.25f;

  bool operator==(const TinyNetConfig&) const = default;

  // 3 conv + 2 FC, ~91k parameters; most of them in fc1.
  static TinyNetConfig t1(int output_dim = 2, std::uint64_t seed = 0) {
    return {TinyNetVariant::kT1,
            {{16, 5, 2, 2}, {32, 3, 2, 1}, {32, 3, 2, 1}},
            {148},
            {},
            output_dim,
            seed};
  }
  // 4 conv + 2 FC, ~300k parameters.
  static TinyNetConfig t2(int output_dim = 2, std::uint64_t seed = 0) {
    return {TinyNetVariant::kT2,
            {{32, 5, 2, 2}, {64, 3, 1, 1}, {64, 3, 2, 1}, {64, 3, 2, 1}},
            {200},
            {},
            output_dim,
            seed};
  }
  // T1's topology at reduced width: convs w, 2w, 2w and fc1 4w (12,386
  // parameters at w = 8 with two outputs).
  static TinyNetConfig t1_scaled(int width, int output_dim = 2, std::uint64_t seed = 0) {
    if (width < 1) throw ArgumentError("width must be >= 1");
    return {TinyNetVariant::kCustom,
            {{width, 5, 2, 2}, {2 * width, 3, 2, 1}, {2 * width, 3, 2, 1}},
            {4 * width},
            {},
            output_dim,
            seed};
  }
  // T2's conv stack with a wider fc1, ~2M parameters.
  static TinyNetConfig t3(int output_dim = 2, std::uint64_t seed = 0) {
    return {TinyNetVariant::kT3,
            {{32, 5, 2, 2}, {64, 3, 1, 1}, {64, 3, 2, 1}, {64, 3, 2, 1}},
            {1850},
            {},
            output_dim,
            seed};
  }
};

enum class LayerKind { kConv, kDense };

struct LayerPlan {
  LayerKind kind = LayerKind::kConv;
  std::string name;
  // Conv geometry (dense layers use in_c = in_features, out_c = out_features, h = w = 1).
  int in_c = 0, in_h = 1, in_w = 1;
  int out_c = 0, out_h = 1, out_w = 1;
  int kernel = 1, stride = 1, padding = 0;
  bool relu = true;
  std::size_t weight_offset = 0;
  std::size_t bias_offset = 0;

  std::size_t fan_in() const {
    return kind == LayerKind::kConv
               ? static_cast<std::size_t>(kernel) * kernel * in_c
               : static_cast<std::size_t>(in_c) * in_h * in_w;
  }
  std::size_t weight_count() const { return fan_in() * static_cast<std::size_t>(out_c); }
  std::size_t param_count() const { return weight_count() + static_cast<std::size_t>(out_c); }
  std::size_t out_pixels() const { return static_cast<std::size_t>(out_h) * out_w; }
  std::size_t out_features() const { return out_pixels() * static_cast<std::size_t>(out_c); }
};

// Shapes and parameter offsets of every layer. Throws ArgumentError on an
// ill-formed configuration (non-positive sizes, first kernel not 5x5, ...).
inline std::vector<LayerPlan> plan_layers(const TinyNetConfig& config) {
  const auto& in = config.input_shape;
  if (in.channels <= 0 || in.height <= 0 || in.width <= 0) throw ArgumentError("bad input shape");
  if (config.convs.empty()) throw ArgumentError("TinyNet needs at least one conv layer");
  if (config.convs.front().kernel != 5) throw ArgumentError("first convolution must be 5x5");
  if (config.output_dim < 1) throw ArgumentError("output_dim must be >= 1");

  std::vector<LayerPlan> plan;
  std::size_t offset = 0;
  int c = in.channels, h = in.height, w = in.width;
  for (std::size_t i = 0; i < config.convs.size(); ++i) {
    const ConvSpec& s = config.convs[i];
    if (s.out_channels <= 0 || s.kernel <= 0 || s.stride <= 0) throw ArgumentError("bad conv spec");
    LayerPlan p;
    p.kind = LayerKind::kConv;
    p.name = "conv" + std::to_string(i + 1);
    p.in_c = c, p.in_h = h, p.in_w = w;
    p.kernel = s.kernel, p.stride = s.stride, p.padding = s.effective_padding();
    p.out_c = s.out_channels;
    p.out_h = (h + 2 * p.padding - s.kernel) / s.stride + 1;
    p.out_w = (w + 2 * p.padding - s.kernel) / s.stride + 1;
    if (p.out_h <= 0 || p.out_w <= 0) throw ArgumentError("conv stack shrinks the image to nothing");
    p.weight_offset = offset;
    p.bias_offset = offset + p.weight_count();
    offset += p.param_count();
    c = p.out_c, h = p.out_h, w = p.out_w;
    plan.push_back(p);
  }
  std::vector<int> widths = config.fc_widths;
  widths.push_back(config.output_dim);
  for (std::size_t i = 0; i < widths.size(); ++i) {
    if (widths[i] <= 0) throw ArgumentError("fully-connected widths must be positive");
    LayerPlan p;
    p.kind = LayerKind::kDense;
    p.name = "fc" + std::to_string(i + 1);
    p.in_c = c, p.in_h = h, p.in_w = w;
    p.out_c = widths[i];
    p.relu = i + 1 < widths.size();
    p.weight_offset = offset;
    p.bias_offset = offset + p.weight_count();
    offset += p.param_count();
    c = p.out_c, h = 1, w = 1;
    plan.push_back(p);
  }
  return plan;
}

inline std::size_t param_count(const TinyNetConfig& config) {
  std::size_t total = 0;
  for (const auto& p : plan_layers(config)) total += p.param_count();
  return total;
}

namespace detail {

// Source pixel of every (output pixel, ky, kx) patch slot for one image, or
// -1 for padding.
inline std::vector<int> patch_table(const LayerPlan& p) {
  std::vector<int> table;
  table.reserve(p.out_pixels() * static_cast<std::size_t>(p.kernel * p.kernel));
  for (int oy = 0; oy < p.out_h; ++oy) {
    for (int ox = 0; ox < p.out_w; ++ox) {
      for (int ky = 0; ky < p.kernel; ++ky) {
        const int iy = oy * p.stride - p.padding + ky;
        for (int kx = 0; kx < p.kernel; ++kx) {
          const int ix = ox * p.stride - p.padding + kx;
          const bool inside = iy >= 0 && iy < p.in_h && ix >= 0 && ix < p.in_w;
          table.push_back(inside ? iy * p.in_w + ix : -1);
        }
      }
    }
  }
  return table;
}

}  // namespace detail

struct ParamBand {
  std::size_t lo = 0, hi = 0;
};

// +-10% around 90k / 300k / 2M.
inline ParamBand variant_band(TinyNetVariant v) {
  switch (v) {
    case TinyNetVariant::kT1: return {81'000, 99'000};
    case TinyNetVariant::kT2: return {270'000, 330'000};
    case TinyNetVariant::kT3: return {1'800'000, 2'200'000};
    case TinyNetVariant::kCustom: break;
  }
  return {0, SIZE_MAX};
}

template <typename Scalar>
class TinyNet {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  // Builds and initializes from config.seed: weights uniform in
  // +-sqrt(6 / fan_in), biases zero.
  explicit TinyNet(TinyNetConfig config) : config_(std::move(config)), layers_(plan_layers(config_)) {
    const std::size_t count = layers_.back().bias_offset + static_cast<std::size_t>(layers_.back().out_c);
    const ParamBand band = variant_band(config_.variant);
    if (count < band.lo || count > band.hi) {
      throw ArgumentError("parameter count " + std::to_string(count) + " outside the " +
                          std::string(to_string(config_.variant)) + " target band");
    }
    params_.assign(count, Scalar(0));
    for (const auto& p : layers_) {
      tables_.push_back(p.kind == LayerKind::kConv ? detail::patch_table(p) : std::vector<int>{});
    }
    for (std::size_t l = 0; l < layers_.size(); ++l) reinitialize_layer(l, config_.seed);
  }

  const TinyNetConfig& config() const { return config_; }
  const std::vector<LayerPlan>& layers() const { return layers_; }
  std::size_t param_count() const { return params_.size(); }
  std::span<Scalar> params() { return params_; }
  std::span<const Scalar> params() const { return params_; }

  std::size_t layer_index(std::string_view name) const {
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      if (layers_[i].name == name) return i;
    }
    throw ArgumentError("unknown layer '" + std::string(name) + "'");
  }

  // Parameter range [begin, end) owned by layers [first, last).
  std::pair<std::size_t, std::size_t> param_range(std::size_t first, std::size_t last) const {
    if (first >= last) return {0, 0};
    return {layers_[first].weight_offset,
            layers_[last - 1].bias_offset + static_cast<std::size_t>(layers_[last - 1].out_c)};
  }

  void reinitialize_layer(std::size_t l, std::uint64_t seed) {
    const LayerPlan& p = layers_.at(l);
    std::mt19937_64 rng(mix_seed(seed, l));
    const double bound = std::sqrt(6.0 / static_cast<double>(p.fan_in()));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (std::size_t k = 0; k < p.weight_count(); ++k) {
      params_[p.weight_offset + k] = static_cast<Scalar>(dist(rng));
    }
    std::fill_n(params_.begin() + static_cast<std::ptrdiff_t>(p.bias_offset), p.out_c, Scalar(0));
  }

  const std::vector<int>& patch_table(std::size_t l) const { return tables_[l]; }

  template <typename Other>
  TinyNet<Other> cast() const {
    TinyNet<Other> out(config_);
    for (std::size_t i = 0; i < params_.size(); ++i) out.params()[i] = static_cast<Other>(params_[i]);
    return out;
  }

  Eigen::Map<const Matrix> weights(std::size_t l) const {
    const LayerPlan& p = layers_[l];
    return {params_.data() + p.weight_offset, p.out_c, static_cast<Eigen::Index>(p.fan_in())};
  }
  Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> bias(std::size_t l) const {
    const LayerPlan& p = layers_[l];
    return {params_.data() + p.bias_offset, p.out_c};
  }

 private:
  TinyNetConfig config_;
  std::vector<LayerPlan> layers_;
  AlignedVector<Scalar> params_;
  std::vector<std::vector<int>> tables_;
};

// Per-batch activations kept for the backward pass. Reusing one instance
// across batches of equal size avoids reallocation.
template <typename Scalar>
struct ForwardState {
  using Matrix = typename TinyNet<Scalar>::Matrix;
  Matrix input;              // in_c x (B * H * W)
  std::vector<Matrix> acts;  // per layer: out_c x (B * out_h * out_w), post-activation
  std::vector<Matrix> cols;  // per conv layer: im2col patches
  Eigen::Index batch = 0;
};

namespace detail {

template <int kC, typename Scalar>
void gather_patches(const std::vector<int>& table, const Scalar* src, Scalar* dst, int C) {
  const int c_count = kC > 0 ? kC : C;
  for (const int pix : table) {
    if (pix < 0) {
      for (int c = 0; c < c_count; ++c) dst[c] = Scalar(0);
    } else {
      const Scalar* px = src + static_cast<std::ptrdiff_t>(pix) * c_count;
      for (int c = 0; c < c_count; ++c) dst[c] = px[c];
    }
    dst += c_count;
  }
}

template <typename Scalar, typename Derived>
void im2col(const LayerPlan& p, const std::vector<int>& table,
            const Eigen::MatrixBase<Derived>& in, Eigen::Index batch,
            typename TinyNet<Scalar>::Matrix& cols) {
  const Eigen::Index k_rows = static_cast<Eigen::Index>(p.fan_in());
  const Eigen::Index n_cols = batch * static_cast<Eigen::Index>(p.out_pixels());
  cols.resize(k_rows, n_cols);
  const Eigen::Index in_hw = static_cast<Eigen::Index>(p.in_h) * p.in_w;
  const int C = p.in_c;
  const Eigen::Index per_image = static_cast<Eigen::Index>(table.size()) * C;
  for (Eigen::Index b = 0; b < batch; ++b) {
    const Scalar* src = in.derived().data() + b * in_hw * C;
    Scalar* dst = cols.data() + b * per_image;
    switch (C) {
      case 1: gather_patches<1>(table, src, dst, C); break;
      case 3: gather_patches<3>(table, src, dst, C); break;
      case 4: gather_patches<4>(table, src, dst, C); break;
      case 8: gather_patches<8>(table, src, dst, C); break;
      case 16: gather_patches<16>(table, src, dst, C); break;
      default: gather_patches<0>(table, src, dst, C); break;
    }
  }
}

template <typename Scalar>
void col2im(const LayerPlan& p, const std::vector<int>& table,
            const typename TinyNet<Scalar>::Matrix& dcols, Eigen::Index batch,
            typename TinyNet<Scalar>::Matrix& din) {
  const Eigen::Index in_hw = static_cast<Eigen::Index>(p.in_h) * p.in_w;
  const int C = p.in_c;
  din.setZero(C, batch * in_hw);
  const Scalar* src = dcols.data();
  Scalar* dst_all = din.data();
  for (Eigen::Index b = 0; b < batch; ++b) {
    Scalar* dst = dst_all + b * in_hw * C;
    for (const int pix : table) {
      if (pix >= 0) {
        Scalar* px = dst + static_cast<std::ptrdiff_t>(pix) * C;
        for (int c = 0; c < C; ++c) px[c] += src[c];
      }
      src += C;
    }
  }
}

}  // namespace detail

// Runs layers [0, stop) (all layers when stop == 0) and returns the output of
// the last one run: logits (output_dim x B) for a full pass. Throws
// ArgumentError on an image whose shape differs from the configured input.
template <typename Scalar>
typename TinyNet<Scalar>::Matrix forward(const TinyNet<Scalar>& net,
                                         std::span<const Image* const> batch,
                                         ForwardState<Scalar>& st, std::size_t stop = 0) {
  using Matrix = typename TinyNet<Scalar>::Matrix;
  const auto& layers = net.layers();
  if (stop == 0 || stop > layers.size()) stop = layers.size();
  const ImageShape& shape = net.config().input_shape;
  const auto B = static_cast<Eigen::Index>(batch.size());
  const Eigen::Index hw = static_cast<Eigen::Index>(shape.height) * shape.width;
  st.batch = B;
  st.input.resize(shape.channels, B * hw);
  for (Eigen::Index b = 0; b < B; ++b) {
    const Image& img = *batch[static_cast<std::size_t>(b)];
    if (img.shape() != shape) throw ArgumentError("image shape does not match the network input");
    const auto px = img.data();
    const Scalar mean = net.config().input_mean;
    const Scalar inv_std = Scalar(1) / static_cast<Scalar>(net.config().input_std);
    for (int c = 0; c < shape.channels; ++c) {
      for (Eigen::Index p = 0; p < hw; ++p) {
        st.input(c, b * hw + p) = (static_cast<Scalar>(px[static_cast<std::size_t>(c * hw + p)]) - mean) * inv_std;
      }
    }
  }
  st.acts.resize(layers.size());
  st.cols.resize(layers.size());
  for (std::size_t l = 0; l < stop; ++l) {
    const LayerPlan& p = layers[l];
    const Matrix& prev = l == 0 ? st.input : st.acts[l - 1];
    Matrix& out = st.acts[l];
    if (p.kind == LayerKind::kConv) {
      detail::im2col<Scalar>(p, net.patch_table(l), prev, B, st.cols[l]);
      out.noalias() = net.weights(l) * st.cols[l];
    } else {
      Eigen::Map<const Matrix> x(prev.data(), static_cast<Eigen::Index>(p.fan_in()), B);
      out.noalias() = net.weights(l) * x;
    }
    out.colwise() += net.bias(l);
    if (p.relu) out = out.cwiseMax(Scalar(0));
  }
  return st.acts[stop - 1];
}

template <typename Scalar>
typename TinyNet<Scalar>::Matrix forward(const TinyNet<Scalar>& net,
                                         std::span<const Image* const> batch) {
  ForwardState<Scalar> st;
  return forward(net, batch, st);
}

inline std::vector<const Image*> image_pointers(std::span<const Image> images) {
  std::vector<const Image*> out;
  out.reserve(images.size());
  for (const auto& im : images) out.push_back(&im);
  return out;
}

struct LossResult {
  double loss = 0.0;           // mean cross-entropy
  std::size_t correct = 0;     // argmax == label
  std::vector<int> predicted;  // argmax per sample
};

// Mean softmax cross-entropy over the columns of `logits`; writes
// d(loss)/d(logits) into `dlogits` when given. Accumulates in double.
template <typename Scalar>
LossResult softmax_cross_entropy(const typename TinyNet<Scalar>::Matrix& logits,
                                 std::span<const int> labels,
                                 typename TinyNet<Scalar>::Matrix* dlogits) {
  const Eigen::Index K = logits.rows(), B = logits.cols();
  if (static_cast<std::size_t>(B) != labels.size()) throw ArgumentError("label count mismatch");
  LossResult r;
  r.predicted.resize(static_cast<std::size_t>(B));
  if (dlogits) dlogits->resize(K, B);
  double total = 0.0;
  std::vector<double> prob(static_cast<std::size_t>(K));
  for (Eigen::Index b = 0; b < B; ++b) {
    const int y = labels[static_cast<std::size_t>(b)];
    if (y < 0 || y >= K) throw ArgumentError("label index out of range");
    Eigen::Index arg = 0;
    double mx = static_cast<double>(logits(0, b));
    for (Eigen::Index k = 1; k < K; ++k) {
      if (static_cast<double>(logits(k, b)) > mx) mx = static_cast<double>(logits(k, b)), arg = k;
    }
    double sum = 0.0;
    for (Eigen::Index k = 0; k < K; ++k) {
      prob[static_cast<std::size_t>(k)] = std::exp(static_cast<double>(logits(k, b)) - mx);
      sum += prob[static_cast<std::size_t>(k)];
    }
    total += std::log(sum) + mx - static_cast<double>(logits(y, b));
    r.predicted[static_cast<std::size_t>(b)] = static_cast<int>(arg);
    r.correct += arg == y ? 1 : 0;
    if (dlogits) {
      for (Eigen::Index k = 0; k < K; ++k) {
        const double g = prob[static_cast<std::size_t>(k)] / sum - (k == y ? 1.0 : 0.0);
        (*dlogits)(k, b) = static_cast<Scalar>(g / static_cast<double>(B));
      }
    }
  }
  r.loss = total / static_cast<double>(B);
  return r;
}

template <typename Scalar>
struct GradientResult {
  LossResult loss;
  AlignedVector<Scalar> grad;  // same layout as TinyNet::params()
};

// Forward + backward for mean cross-entropy. Gradients are computed for
// layers [first_trainable, L); entries of lower layers stay zero.
template <typename Scalar>
GradientResult<Scalar> backward(const TinyNet<Scalar>& net, std::span<const Image* const> batch,
                                std::span<const int> labels, ForwardState<Scalar>& st,
                                std::size_t first_trainable = 0) {
  using Matrix = typename TinyNet<Scalar>::Matrix;
  const auto& layers = net.layers();
  for (int y : labels) {
    if (y < 0 || y >= net.config().output_dim) throw ArgumentError("label index out of range");
  }
  const Matrix logits = forward(net, batch, st);
  GradientResult<Scalar> out;
  Matrix delta;
  out.loss = softmax_cross_entropy<Scalar>(logits, labels, &delta);
  out.grad.assign(net.param_count(), Scalar(0));
  const Eigen::Index B = st.batch;
  Matrix dprev;
  for (std::size_t l = layers.size(); l-- > first_trainable;) {
    const LayerPlan& p = layers[l];
    // `delta` is d(loss)/d(pre-activation output of layer l).
    Eigen::Map<Matrix> dw(out.grad.data() + p.weight_offset, p.out_c, static_cast<Eigen::Index>(p.fan_in()));
    Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> db(out.grad.data() + p.bias_offset, p.out_c);
    const Matrix& prev = l == 0 ? st.input : st.acts[l - 1];
    const bool need_input_grad = l > first_trainable;
    if (p.kind == LayerKind::kConv) {
      dw.noalias() = delta * st.cols[l].transpose();
      db = delta.rowwise().sum();
      if (need_input_grad) {
        const Matrix dcols = net.weights(l).transpose() * delta;
        detail::col2im<Scalar>(p, net.patch_table(l), dcols, B, dprev);
      }
    } else {
      Eigen::Map<const Matrix> x(prev.data(), static_cast<Eigen::Index>(p.fan_in()), B);
      dw.noalias() = delta * x.transpose();
      db = delta.rowwise().sum();
      if (need_input_grad) {
        dprev.noalias() = net.weights(l).transpose() * delta;
        // Back to the previous layer's (channels x B*pixels) layout.
        const LayerPlan& below = layers[l - 1];
        dprev.resize(below.out_c, B * static_cast<Eigen::Index>(below.out_pixels()));
      }
    }
    if (!need_input_grad) break;
    // Every hidden layer is followed by ReLU.
    delta = dprev.cwiseProduct((prev.array() > Scalar(0)).matrix().template cast<Scalar>());
  }
  return out;
}

template <typename Scalar>
GradientResult<Scalar> backward(const TinyNet<Scalar>& net, std::span<const Image* const> batch,
                                std::span<const int> labels) {
  ForwardState<Scalar> st;
  return backward(net, batch, labels, st);
}

// Per-sample softmax output summary.
struct Prediction {
  int label = 0;             // argmax
  double confidence = 0.0;   // max softmax probability
  double loss = 0.0;         // -log p[true label], NaN if no label given
};

template <typename Scalar>
std::vector<Prediction> predict(const TinyNet<Scalar>& net, std::span<const Image* const> images,
                                std::span<const int> labels = {}, std::size_t chunk = 256) {
  if (!labels.empty() && labels.size() != images.size()) throw ArgumentError("label count mismatch");
  std::vector<Prediction> out;
  out.reserve(images.size());
  ForwardState<Scalar> st;
  for (std::size_t start = 0; start < images.size(); start += chunk) {
    const std::size_t len = std::min(chunk, images.size() - start);
    const auto logits = forward(net, images.subspan(start, len), st);
    for (Eigen::Index b = 0; b < logits.cols(); ++b) {
      double mx = -INFINITY;
      int arg = 0;
      for (Eigen::Index k = 0; k < logits.rows(); ++k) {
        if (static_cast<double>(logits(k, b)) > mx) mx = static_cast<double>(logits(k, b)), arg = static_cast<int>(k);
      }
      double sum = 0.0;
      for (Eigen::Index k = 0; k < logits.rows(); ++k) sum += std::exp(static_cast<double>(logits(k, b)) - mx);
      Prediction p;
      p.label = arg;
      p.confidence = 1.0 / sum;
      p.loss = NAN;
      if (!labels.empty()) {
        const int y = labels[start + static_cast<std::size_t>(b)];
        if (y < 0 || y >= logits.rows()) throw ArgumentError("label index out of range");
        p.loss = std::log(sum) + mx - static_cast<double>(logits(y, b));
      }
      out.push_back(p);
    }
  }
  return out;
}

// Flattened output of layer `layer` (features x N), chunked.
template <typename Scalar>
Eigen::MatrixXd layer_activations(const TinyNet<Scalar>& net, std::span<const Image* const> images,
                                  std::size_t layer, std::size_t chunk = 256) {
  const LayerPlan& p = net.layers().at(layer);
  const auto features = static_cast<Eigen::Index>(p.out_features());
  Eigen::MatrixXd out(features, static_cast<Eigen::Index>(images.size()));
  ForwardState<Scalar> st;
  for (std::size_t start = 0; start < images.size(); start += chunk) {
    const std::size_t len = std::min(chunk, images.size() - start);
    const auto act = forward(net, images.subspan(start, len), st, layer + 1);
    Eigen::Map<const typename TinyNet<Scalar>::Matrix> flat(act.data(), features, static_cast<Eigen::Index>(len));
    out.middleCols(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(len)) = flat.template cast<double>();
  }
  return out;
}

}  // namespace memaudit
