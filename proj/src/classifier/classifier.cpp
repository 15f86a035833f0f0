/*
 * Copyright 2026 The cle-screen Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "classifier/classifier.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

#include "classifier/network.hpp"
#include "common/error.hpp"
#include "common/hashing.hpp"

namespace cle::classifier {
namespace {

using ingest::Label;

void normalize_patch(std::span<const std::uint8_t> src, InputNormalization mode, std::span<float> dst) {
  if (mode == InputNormalization::kUnitRange) {
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = static_cast<float>(src[i]) / 255.0f;
    return;
  }
  double sum = 0.0, sq = 0.0;
  for (auto v : src) {
    sum += v;
    sq += static_cast<double>(v) * v;
  }
  const double n = static_cast<double>(src.size());
  const double mean = sum / n;
  const double sd = std::max(std::sqrt(std::max(sq / n - mean * mean, 0.0)), 1e-3);
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = static_cast<float>((src[i] - mean) / sd);
}

// One of the eight symmetries of the square, applied in place.
void dihedral(std::span<float> patch, int size, int op, std::vector<float>& scratch) {
  if (op == 0) return;
  scratch.assign(patch.begin(), patch.end());
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      int sx = x, sy = y;
      if (op & 1) sx = size - 1 - sx;
      if (op & 2) sy = size - 1 - sy;
      if (op & 4) std::swap(sx, sy);
      patch[static_cast<std::size_t>(y) * size + x] = scratch[static_cast<std::size_t>(sy) * size + sx];
    }
  }
}

ProbPair pair_from_logits(double healthy_logit, double carcinoma_logit) {
  const double pc = 1.0 / (1.0 + std::exp(healthy_logit - carcinoma_logit));
  return {1.0 - pc, pc};
}

class CnnClassifier final : public PatchClassifier {
 public:
  CnnClassifier(ClassifierConfig config, nn::Network<float> net, TrainingLog log)
      : PatchClassifier(std::move(config), std::move(log)), net_(std::move(net)) {}

  std::vector<float> parameters() const override {
    auto p = net_.params();
    return {p.begin(), p.end()};
  }

 protected:
  void score(std::span<const std::uint8_t> pixels, std::size_t count, std::span<ProbPair> out) const override {
    auto ws = net_.make_workspace();
    const std::size_t n = static_cast<std::size_t>(patch_size()) * patch_size();
    std::vector<float> input(n);
    for (std::size_t i = 0; i < count; ++i) {
      normalize_patch(pixels.subspan(i * n, n), config().normalization, input);
      auto logits = net_.forward(input, ws);
      out[i] = pair_from_logits(logits[0], logits[1]);
    }
  }

 private:
  nn::Network<float> net_;
};

/// Scores a patch by its mean intensity relative to a learned threshold.
class MeanIntensityClassifier final : public PatchClassifier {
 public:
  struct State {
    double threshold = 127.5;
    double direction = 1.0;  // +1: carcinoma brighter
    double scale = 10.0;
  };

  MeanIntensityClassifier(ClassifierConfig config, State state, TrainingLog log)
      : PatchClassifier(std::move(config), std::move(log)), state_(state) {}

  nlohmann::json state() const override {
    return {{"threshold", state_.threshold}, {"direction", state_.direction}, {"scale", state_.scale}};
  }

 protected:
  void score(std::span<const std::uint8_t> pixels, std::size_t count, std::span<ProbPair> out) const override {
    const std::size_t n = static_cast<std::size_t>(patch_size()) * patch_size();
    for (std::size_t i = 0; i < count; ++i) {
      auto px = pixels.subspan(i * n, n);
      const double mean = std::accumulate(px.begin(), px.end(), 0.0) / static_cast<double>(n);
      const double z = state_.direction * (mean - state_.threshold) / state_.scale;
      out[i] = pair_from_logits(0.0, z);
    }
  }

 private:
  State state_;
};

std::array<std::size_t, 2> class_counts(const LabeledPatches& patches) {
  std::array<std::size_t, 2> counts{};
  for (auto l : patches.labels) ++counts[static_cast<int>(l)];
  return counts;
}

std::unique_ptr<PatchClassifier> train_mean_intensity(const ClassifierConfig& config,
                                                      const LabeledPatches& patches) {
  std::array<double, 2> sum{}, sq{};
  const auto counts = class_counts(patches);
  const double n = static_cast<double>(patches.patch_size) * patches.patch_size;
  for (std::size_t i = 0; i < patches.size(); ++i) {
    auto px = patches.patch(i);
    const double m = std::accumulate(px.begin(), px.end(), 0.0) / n;
    const int c = static_cast<int>(patches.labels[i]);
    sum[c] += m;
    sq[c] += m * m;
  }
  MeanIntensityClassifier::State s;
  const double mh = sum[0] / counts[0], mc = sum[1] / counts[1];
  s.threshold = 0.5 * (mh + mc);
  s.direction = mc >= mh ? 1.0 : -1.0;
  const double var = (sq[0] - counts[0] * mh * mh + sq[1] - counts[1] * mc * mc) / static_cast<double>(patches.size());
  s.scale = std::max(std::sqrt(std::max(var, 0.0)), 1.0);
  return std::make_unique<MeanIntensityClassifier>(config, s, TrainingLog{});
}

std::unique_ptr<PatchClassifier> train_cnn(const ClassifierConfig& config, const LabeledPatches& patches) {
  nn::Network<float> net({1, config.patch_size, config.patch_size}, config.layers);
  net.init_he(derive_seed(config.seed, "init"));
  TrainingLog log;
  if (config.epochs == 0) return std::make_unique<CnnClassifier>(config, std::move(net), std::move(log));

  const auto counts = class_counts(patches);
  std::array<float, 2> weight{1.0f, 1.0f};
  if (config.class_weighting == ClassWeighting::kInverseFrequency) {
    for (int c = 0; c < 2; ++c) {
      weight[c] = static_cast<float>(static_cast<double>(patches.size()) / (2.0 * static_cast<double>(counts[c])));
    }
  }

  std::mt19937_64 shuffle_rng(derive_seed(config.seed, "shuffle"));
  std::mt19937_64 augment_rng(derive_seed(config.seed, "augment"));
  const std::size_t count = patches.size();
  const std::size_t px = static_cast<std::size_t>(config.patch_size) * config.patch_size;
  std::vector<std::size_t> order(count);
  std::vector<float> input(px), scratch, grad(net.param_count());
  std::vector<float> m(net.param_count(), 0.0f), v(net.param_count(), 0.0f);
  std::array<float, 2> prob{};
  auto ws = net.make_workspace();
  const float b1 = static_cast<float>(config.beta1), b2 = static_cast<float>(config.beta2);
  const float eps = static_cast<float>(config.epsilon);
  double b1t = 1.0, b2t = 1.0;
  const std::size_t batches_per_epoch = (count + config.batch_size - 1) / config.batch_size;
  const double total_steps = static_cast<double>(batches_per_epoch) * config.epochs;
  double step_index = 0.0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < count; start += config.batch_size) {
      const std::size_t end = std::min(count, start + static_cast<std::size_t>(config.batch_size));
      std::fill(grad.begin(), grad.end(), 0.0f);
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t idx = order[k];
        normalize_patch(patches.patch(idx), config.normalization, input);
        if (config.augment) dihedral(input, config.patch_size, static_cast<int>(augment_rng() % 8), scratch);
        const int label = static_cast<int>(patches.labels[idx]);
        loss_sum += net.loss_and_gradient(input, label, weight[label], ws, grad, prob);
        const int predicted = prob[1] >= prob[0] ? 1 : 0;
        correct += predicted == label;
      }
      const float inv = 1.0f / static_cast<float>(end - start);
      b1t *= config.beta1;
      b2t *= config.beta2;
      double rate = config.initial_step_size;
      if (config.step_schedule == StepSchedule::kCosine) {
        rate *= 0.5 * (1.0 + std::cos(std::numbers::pi * step_index / total_steps));
      }
      step_index += 1.0;
      const float step = static_cast<float>(rate * std::sqrt(1.0 - b2t) / (1.0 - b1t));
      auto params = net.params();
      for (std::size_t i = 0; i < params.size(); ++i) {
        const float g = grad[i] * inv;
        m[i] = b1 * m[i] + (1.0f - b1) * g;
        v[i] = b2 * v[i] + (1.0f - b2) * g * g;
        params[i] -= step * m[i] / (std::sqrt(v[i]) + eps);
      }
    }
    log.push_back({epoch + 1, loss_sum / static_cast<double>(count),
                   static_cast<double>(correct) / static_cast<double>(count)});
  }
  return std::make_unique<CnnClassifier>(config, std::move(net), std::move(log));
}

}  // namespace

void LabeledPatches::append(const fov::PatchSet& set, ingest::Label label) {
  if (set.empty()) return;
  if (patch_size == 0 && labels.empty()) patch_size = set.patch_size;
  if (set.patch_size != patch_size) fail(ErrorCode::kSizeMismatch, "patch size differs from the collection");
  pixels.insert(pixels.end(), set.pixels.begin(), set.pixels.end());
  labels.insert(labels.end(), set.size(), label);
}

void LabeledPatches::append(std::span<const std::uint8_t> patch, ingest::Label label) {
  if (patch.size() != static_cast<std::size_t>(patch_size) * patch_size) {
    fail(ErrorCode::kSizeMismatch, "patch size differs from the collection");
  }
  pixels.insert(pixels.end(), patch.begin(), patch.end());
  labels.push_back(label);
}

std::vector<ProbPair> PatchClassifier::predict(const fov::PatchSet& patches) const {
  if (patches.empty()) return {};
  return predict(patches.pixels, patches.patch_size, patches.size());
}

std::vector<ProbPair> PatchClassifier::predict(std::span<const std::uint8_t> pixels, int size,
                                               std::size_t count) const {
  if (size != patch_size()) {
    fail(ErrorCode::kSizeMismatch, "classifier expects " + std::to_string(patch_size()) + "px patches, got " +
                                       std::to_string(size) + "px");
  }
  if (pixels.size() != count * static_cast<std::size_t>(size) * size) {
    fail(ErrorCode::kSizeMismatch, "pixel buffer does not hold the stated number of patches");
  }
  std::vector<ProbPair> out(count);
  score(pixels, count, out);
  return out;
}

std::unique_ptr<PatchClassifier> train(const ClassifierConfig& config, const LabeledPatches& patches) {
  config.validate();
  if (patches.patch_size != config.patch_size) {
    fail(ErrorCode::kSizeMismatch, "training patches are " + std::to_string(patches.patch_size) +
                                       "px, config expects " + std::to_string(config.patch_size) + "px");
  }
  const auto counts = class_counts(patches);
  if (counts[0] == 0 || counts[1] == 0) fail(ErrorCode::kDegenerate, "degenerate training set");
  switch (config.kind) {
    case ClassifierKind::kCnn: return train_cnn(config, patches);
    case ClassifierKind::kMeanIntensity: return train_mean_intensity(config, patches);
  }
  fail(ErrorCode::kInternal, "unhandled classifier kind");
}

std::unique_ptr<PatchClassifier> restore(const ClassifierConfig& config, const nlohmann::json& state,
                                         std::vector<float> parameters, TrainingLog log) {
  config.validate();
  switch (config.kind) {
    case ClassifierKind::kCnn: {
      nn::Network<float> net({1, config.patch_size, config.patch_size}, config.layers);
      if (parameters.size() != net.param_count()) {
        fail(ErrorCode::kFormat, "corrupt model file: parameter count mismatch");
      }
      std::copy(parameters.begin(), parameters.end(), net.params().begin());
      return std::make_unique<CnnClassifier>(config, std::move(net), std::move(log));
    }
    case ClassifierKind::kMeanIntensity: {
      MeanIntensityClassifier::State s;
      s.threshold = state.at("threshold").get<double>();
      s.direction = state.at("direction").get<double>();
      s.scale = state.at("scale").get<double>();
      return std::make_unique<MeanIntensityClassifier>(config, s, std::move(log));
    }
  }
  fail(ErrorCode::kInternal, "unhandled classifier kind");
}

std::size_t parameter_count(const ClassifierConfig& config) {
  if (config.kind != ClassifierKind::kCnn) return 3;
  return nn::Network<float>({1, config.patch_size, config.patch_size}, config.layers).param_count();
}

}  // namespace cle::classifier
