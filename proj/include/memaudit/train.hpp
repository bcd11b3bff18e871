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

// SGD with momentum, weight decay and accuracy-triggered learning-rate
// stages; plus the freeze-and-retrain step used by partial-layer attacks.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "memaudit/error.hpp"
#include "memaudit/image.hpp"
#include "memaudit/tinynet.hpp"

namespace memaudit {

enum class LrSchedule {
  kAccuracyStaged,  // divide when the epoch's balanced accuracy passes each of lr_drop_at
  kStep,            // divide every lr_step_epochs epochs
};

inline std::string_view to_string(LrSchedule s) {
  return s == LrSchedule::kStep ? "step" : "staged";
}

inline LrSchedule parse_lr_schedule(std::string_view s) {
  if (s == "staged") return LrSchedule::kAccuracyStaged;
  if (s == "step") return LrSchedule::kStep;
  throw InputError("unknown learning-rate schedule '" + std::string(s) + "'");
}

struct TrainConfig {
  AugmentationMode augmentation = AugmentationMode::kNone;
  LrSchedule schedule = LrSchedule::kAccuracyStaged;
  double initial_lr = 1e-2;
  // Divide the rate by lr_drop_factor the first time the epoch's balanced
  // accuracy exceeds each value, in order, at most one stage per epoch.
  std::vector<double> lr_drop_at = {0.6, 0.9};
  double lr_drop_factor = 10.0;
  int lr_step_epochs = 30;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  int batch_size = 32;
  int max_epochs = 50;
  // Early stop once the epoch's balanced accuracy reaches stop_accuracy for
  // stop_patience consecutive epochs. Values above 1 disable it.
  double stop_accuracy = 2.0;
  int stop_patience = 1;
  std::uint64_t seed = 0;
};

struct TrainExample {
  const Image* image = nullptr;
  int label = 0;
};

// Produces the examples of one epoch. The returned pointers must stay valid
// until the next call.
using EpochSampler = std::function<std::vector<TrainExample>(int epoch, std::mt19937_64& rng)>;

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;
  double loss = 0.0;
  double accuracy = 0.0;
  double balanced_accuracy = 0.0;
};

struct TrainResult {
  std::vector<EpochRecord> trace;
  int epochs_run = 0;
  bool stopped_early = false;
};

// Mean per-class recall over the classes that appear in `labels`.
inline double balanced_accuracy(std::span<const int> labels, std::span<const int> predicted,
                                int num_classes) {
  std::vector<std::size_t> hit(static_cast<std::size_t>(num_classes), 0), seen(hit);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto y = static_cast<std::size_t>(labels[i]);
    ++seen[y];
    hit[y] += predicted[i] == labels[i] ? 1 : 0;
  }
  double sum = 0.0;
  int classes = 0;
  for (std::size_t k = 0; k < seen.size(); ++k) {
    if (seen[k] == 0) continue;
    sum += static_cast<double>(hit[k]) / static_cast<double>(seen[k]);
    ++classes;
  }
  return classes == 0 ? 0.0 : sum / classes;
}

// Trains layers [first_trainable, L) of `model` in place. Deterministic
// given (model, sampler, config) on one platform. Throws DivergenceError on
// a non-finite loss.
inline TrainResult train(TinyNet<float>& model, const EpochSampler& sampler,
                         const TrainConfig& config, std::size_t first_trainable = 0) {
  if (config.batch_size < 1) throw ArgumentError("batch_size must be >= 1");
  const auto [begin, end] = model.param_range(first_trainable, model.layers().size());
  AlignedVector<float> velocity(end - begin, 0.0f);
  std::mt19937_64 rng(mix_seed(config.seed, 0x7EA1));
  double lr = config.initial_lr;
  std::size_t stage = 0;
  int streak = 0;
  const int K = model.config().output_dim;

  TrainResult result;
  ForwardState<float> st;
  std::vector<Image> views;
  std::vector<const Image*> ptrs;
  std::vector<int> labels;
  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    std::vector<TrainExample> examples = sampler(epoch, rng);
    if (examples.empty()) throw ArgumentError("sampler produced an empty epoch");
    std::shuffle(examples.begin(), examples.end(), rng);

    std::vector<int> epoch_labels, epoch_pred;
    epoch_labels.reserve(examples.size());
    epoch_pred.reserve(examples.size());
    double loss_sum = 0.0;
    std::size_t correct = 0;
    const auto bs = static_cast<std::size_t>(config.batch_size);
    for (std::size_t start = 0; start < examples.size(); start += bs) {
      const std::size_t len = std::min(bs, examples.size() - start);
      views.clear();
      labels.clear();
      for (std::size_t i = 0; i < len; ++i) {
        const TrainExample& ex = examples[start + i];
        views.push_back(augment(*ex.image, config.augmentation, rng));
        labels.push_back(ex.label);
      }
      ptrs = image_pointers(views);
      GradientResult<float> g = backward(model, std::span<const Image* const>(ptrs), labels, st, first_trainable);
      if (!std::isfinite(g.loss.loss)) {
        throw DivergenceError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                              std::to_string(start / bs) + " (lr " + std::to_string(lr) + ")");
      }
      loss_sum += g.loss.loss * static_cast<double>(len);
      correct += g.loss.correct;
      epoch_labels.insert(epoch_labels.end(), labels.begin(), labels.end());
      epoch_pred.insert(epoch_pred.end(), g.loss.predicted.begin(), g.loss.predicted.end());

      auto params = model.params();
      const auto mu = static_cast<float>(config.momentum);
      const auto wd = static_cast<float>(config.weight_decay);
      const auto step = static_cast<float>(lr);
      for (std::size_t i = begin; i < end; ++i) {
        float& v = velocity[i - begin];
        v = mu * v + g.grad[i] + wd * params[i];
        params[i] -= step * v;
      }
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = lr;
    rec.loss = loss_sum / static_cast<double>(examples.size());
    rec.accuracy = static_cast<double>(correct) / static_cast<double>(examples.size());
    rec.balanced_accuracy = balanced_accuracy(epoch_labels, epoch_pred, K);
    result.trace.push_back(rec);
    result.epochs_run = epoch + 1;

    if (config.schedule == LrSchedule::kAccuracyStaged) {
      if (stage < config.lr_drop_at.size() && rec.balanced_accuracy > config.lr_drop_at[stage]) {
        lr /= config.lr_drop_factor;
        ++stage;
      }
    } else if (config.lr_step_epochs > 0 && (epoch + 1) % config.lr_step_epochs == 0) {
      lr /= config.lr_drop_factor;
    }
    streak = rec.balanced_accuracy >= config.stop_accuracy ? streak + 1 : 0;
    if (streak >= config.stop_patience && config.stop_accuracy <= 1.0) {
      result.stopped_early = true;
      break;
    }
  }
  return result;
}

// Index of the last layer kept by a cut. "softmax" keeps everything,
// "last_block" keeps the whole conv stack, any layer name keeps up to and
// including that layer.
inline std::size_t cut_layer_index(const TinyNet<float>& model, std::string_view cut) {
  const auto& layers = model.layers();
  if (cut == "softmax") return layers.size() - 1;
  if (cut == "last_block") {
    std::size_t last_conv = 0;
    for (std::size_t i = 0; i < layers.size(); ++i) {
      if (layers[i].kind == LayerKind::kConv) last_conv = i;
    }
    return last_conv;
  }
  return model.layer_index(cut);
}

struct RetrainResult {
  TinyNet<float> model;
  TrainResult train;
  std::size_t kept_layers = 0;
};

// Keeps the layers up to the cut frozen, re-initializes everything above it
// and trains those layers on `public_data` only.
inline RetrainResult truncate_and_retrain(const TinyNet<float>& model, std::string_view cut,
                                          const EpochSampler& public_data,
                                          const TrainConfig& config) {
  const std::size_t keep = cut_layer_index(model, cut) + 1;
  RetrainResult r{model, {}, keep};
  if (keep == model.layers().size()) return r;
  for (std::size_t l = keep; l < model.layers().size(); ++l) {
    r.model.reinitialize_layer(l, mix_seed(config.seed, 0xC07));
  }
  r.train = train(r.model, public_data, config, keep);
  return r;
}

// Sampler over a fixed labelled set: every example once per epoch.
inline EpochSampler fixed_set_sampler(const std::vector<LabeledImage>& data) {
  return [&data](int, std::mt19937_64&) {
    std::vector<TrainExample> out;
    out.reserve(data.size());
    for (const auto& d : data) out.push_back({&d.image, d.label});
    return out;
  };
}

}  // namespace memaudit
