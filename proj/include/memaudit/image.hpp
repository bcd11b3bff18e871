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

// Planar float images and the flip / integer-translation augmentations.

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "memaudit/error.hpp"

namespace memaudit {

struct ImageShape {
  int channels = 3;
  int height = 32;
  int width = 32;

  std::size_t size() const {
    return static_cast<std::size_t>(channels) * static_cast<std::size_t>(height) *
           static_cast<std::size_t>(width);
  }
  bool operator==(const ImageShape&) const = default;
};

// CHW planar image, pixel values nominally in [0, 1].
class Image {
 public:
  Image() : Image(ImageShape{}) {}
  explicit Image(ImageShape shape, float fill = 0.0f) : shape_(shape), data_(shape.size(), fill) {}
  Image(ImageShape shape, std::vector<float> data) : shape_(shape), data_(std::move(data)) {
    if (data_.size() != shape_.size()) throw ArgumentError("image data does not match shape");
  }

  const ImageShape& shape() const { return shape_; }
  int channels() const { return shape_.channels; }
  int height() const { return shape_.height; }
  int width() const { return shape_.width; }

  float& at(int c, int y, int x) { return data_[index(c, y, x)]; }
  float at(int c, int y, int x) const { return data_[index(c, y, x)]; }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }

  bool operator==(const Image&) const = default;

 private:
  std::size_t index(int c, int y, int x) const {
    return (static_cast<std::size_t>(c) * shape_.height + static_cast<std::size_t>(y)) *
               shape_.width +
           static_cast<std::size_t>(x);
  }

  ImageShape shape_;
  std::vector<float> data_;
};

enum class AugmentationMode { kNone, kFlip, kFlipCrop1, kFlipCrop2, kFlipCrop5 };

inline std::string_view to_string(AugmentationMode m) {
  switch (m) {
    case AugmentationMode::kNone: return "none";
    case AugmentationMode::kFlip: return "flip";
    case AugmentationMode::kFlipCrop1: return "flip_crop1";
    case AugmentationMode::kFlipCrop2: return "flip_crop2";
    case AugmentationMode::kFlipCrop5: return "flip_crop5";
  }
  return "none";
}

inline AugmentationMode parse_augmentation(std::string_view s) {
  for (auto m : {AugmentationMode::kNone, AugmentationMode::kFlip, AugmentationMode::kFlipCrop1,
                 AugmentationMode::kFlipCrop2, AugmentationMode::kFlipCrop5}) {
    if (s == to_string(m)) return m;
  }
  throw InputError("unknown augmentation mode '" + std::string(s) + "'");
}

inline bool has_flip(AugmentationMode m) { return m != AugmentationMode::kNone; }

inline int crop_radius(AugmentationMode m) {
  switch (m) {
    case AugmentationMode::kFlipCrop1: return 1;
    case AugmentationMode::kFlipCrop2: return 2;
    case AugmentationMode::kFlipCrop5: return 5;
    default: return 0;
  }
}

// Number of distinct views the mode can produce: 2 (2k+1)^2 with flips.
inline int view_count(AugmentationMode m) {
  const int side = 2 * crop_radius(m) + 1;
  return (has_flip(m) ? 2 : 1) * side * side;
}

struct AugmentedView {
  bool flip = false;
  int dx = 0;
  int dy = 0;
  bool operator==(const AugmentedView&) const = default;
};

template <typename Rng>
AugmentedView sample_view(AugmentationMode mode, Rng& rng) {
  AugmentedView v;
  if (has_flip(mode)) v.flip = std::bernoulli_distribution(0.5)(rng);
  if (const int k = crop_radius(mode); k > 0) {
    std::uniform_int_distribution<int> shift(-k, k);
    v.dx = shift(rng);
    v.dy = shift(rng);
  }
  return v;
}

// Mirror horizontally (if requested), then translate by (dx, dy);
// exposed pixels are zero.
inline Image apply_view(const Image& in, const AugmentedView& v) {
  if (!v.flip && v.dx == 0 && v.dy == 0) return in;
  Image out(in.shape(), 0.0f);
  const int h = in.height(), w = in.width();
  for (int c = 0; c < in.channels(); ++c) {
    for (int y = 0; y < h; ++y) {
      const int sy = y - v.dy;
      if (sy < 0 || sy >= h) continue;
      for (int x = 0; x < w; ++x) {
        int sx = x - v.dx;
        if (sx < 0 || sx >= w) continue;
        if (v.flip) sx = w - 1 - sx;
        out.at(c, y, x) = in.at(c, sy, sx);
      }
    }
  }
  return out;
}

template <typename Rng>
Image augment(const Image& in, AugmentationMode mode, Rng& rng) {
  if (mode == AugmentationMode::kNone) return in;
  return apply_view(in, sample_view(mode, rng));
}

}  // namespace memaudit
