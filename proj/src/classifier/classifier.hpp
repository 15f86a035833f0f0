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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "classifier/config.hpp"
#include "fov/fov.hpp"
#include "ingest/manifest.hpp"

namespace cle::classifier {

struct ProbPair {
  double healthy = 1.0;
  double carcinoma = 0.0;

  friend bool operator==(const ProbPair&, const ProbPair&) = default;
};

struct EpochStats {
  int epoch = 0;
  double loss = 0.0;
  double accuracy = 0.0;

  friend bool operator==(const EpochStats&, const EpochStats&) = default;
};

using TrainingLog = std::vector<EpochStats>;

/// Training input: equally sized square patches with one label each.
struct LabeledPatches {
  int patch_size = 0;
  std::vector<std::uint8_t> pixels;
  std::vector<ingest::Label> labels;

  std::size_t size() const noexcept { return labels.size(); }
  std::span<const std::uint8_t> patch(std::size_t i) const {
    const std::size_t n = static_cast<std::size_t>(patch_size) * patch_size;
    return std::span<const std::uint8_t>(pixels).subspan(i * n, n);
  }
  void append(const fov::PatchSet& set, ingest::Label label);
  void append(std::span<const std::uint8_t> patch, ingest::Label label);
};

/// A trained patch classifier. Immutable after training or loading; predict
/// is const and safe to call concurrently.
class PatchClassifier {
 public:
  virtual ~PatchClassifier() = default;

  ClassifierKind kind() const noexcept { return config_.kind; }
  const ClassifierConfig& config() const noexcept { return config_; }
  int patch_size() const noexcept { return config_.patch_size; }
  const TrainingLog& training_log() const noexcept { return log_; }

  // One probability pair per patch, in input order. Each patch is scored on
  // its own, so results do not depend on what else is in the batch.
  std::vector<ProbPair> predict(const fov::PatchSet& patches) const;
  std::vector<ProbPair> predict(std::span<const std::uint8_t> pixels, int patch_size, std::size_t count) const;

  // Serialised classifier-specific state and flat parameter vector.
  virtual nlohmann::json state() const { return nlohmann::json::object(); }
  virtual std::vector<float> parameters() const { return {}; }

 protected:
  PatchClassifier(ClassifierConfig config, TrainingLog log) : config_(std::move(config)), log_(std::move(log)) {}
  virtual void score(std::span<const std::uint8_t> pixels, std::size_t count, std::span<ProbPair> out) const = 0;

 private:
  ClassifierConfig config_;
  TrainingLog log_;
};

/// Trains a classifier of config.kind. Throws kDegenerate when only one class
/// is present and kSizeMismatch when the patches do not match
/// config.patch_size. With a fixed seed and input order the training log is
/// reproduced bit for bit.
std::unique_ptr<PatchClassifier> train(const ClassifierConfig& config, const LabeledPatches& patches);

// Rebuilds a classifier from config, state, parameters and log (used by load).
std::unique_ptr<PatchClassifier> restore(const ClassifierConfig& config, const nlohmann::json& state,
                                         std::vector<float> parameters, TrainingLog log);

std::size_t parameter_count(const ClassifierConfig& config);

inline constexpr std::uint32_t kModelFormatVersion = 1;

void save_classifier(const PatchClassifier& classifier, const std::filesystem::path& path);
// Throws kFormat: "corrupt model file" on truncation or checksum mismatch,
// and on a format version other than kModelFormatVersion.
std::unique_ptr<PatchClassifier> load_classifier(const std::filesystem::path& path);

}  // namespace cle::classifier
