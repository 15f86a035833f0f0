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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "classifier/classifier.hpp"
#include "evaluation/folds.hpp"
#include "evaluation/metrics.hpp"
#include "fusion/fusion.hpp"
#include "fusion/inference.hpp"
#include "ingest/manifest.hpp"

namespace cle::experiment {

struct ExperimentCondition {
  std::string name;
  std::vector<std::string> train_datasets;
  std::vector<std::string> test_datasets;
  eval::Scheme scheme = eval::Scheme::kLopo;
  classifier::ClassifierConfig classifier;
  fusion::FusionMethod fusion = fusion::FusionMethod::kMean;
  double threshold = fusion::kDefaultThreshold;
  // Unset: derived from the suite seed and the condition name.
  std::optional<std::uint64_t> seed;

  // LOPO iff the train and test selectors name the same datasets.
  void validate() const;
};

/// The five standard conditions: "OC", "VC" (LOPO within a dataset), "OC/VC",
/// "VC/OC" (train on one, test on the other) and "OC+VC" (LOPO on both).
ExperimentCondition preset_condition(std::string_view name, const classifier::ClassifierConfig& classifier = {});
std::vector<std::string> preset_condition_names();

struct Experiment {
  std::uint64_t seed = 0;
  int jobs = 1;             // concurrent folds within a condition
  bool save_models = true;  // keep per-fold models under models/<hash>/
  std::vector<ExperimentCondition> conditions;
};

/// {"seed", "jobs", "save_models", "classifier", "fusion", "threshold",
///  "conditions": ["OC", ..., {"name", "train", "test", "scheme", ...}]}
/// Top-level classifier/fusion/threshold are defaults for every condition.
Experiment parse_experiment(const nlohmann::json& j);
Experiment load_experiment(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentCondition& c);
nlohmann::json to_json(const Experiment& e);

struct FoldResult {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> train_patients;
  std::vector<std::string> test_patients;
  std::size_t train_images = 0;
  std::size_t train_patches = 0;
  std::size_t test_images = 0;
  classifier::TrainingLog training_log;
  std::string model_path;  // relative to the output directory; empty if not kept
  double train_seconds = 0.0;
  double predict_seconds = 0.0;
};

struct Provenance {
  std::string config_hash;
  std::string corpus_hash;
  std::uint64_t seed = 0;
};

struct ConditionResult {
  ExperimentCondition condition;
  bool ok = false;
  std::string error;
  eval::MetricsReport report;
  std::vector<FoldResult> folds;
  std::vector<fusion::PredictionRow> predictions;  // pooled over folds, manifest order
  std::vector<fusion::Exclusion> excluded;
  Provenance provenance;
  double wall_seconds = 0.0;
};

struct RunOptions {
  std::filesystem::path out_dir;  // empty: nothing is written
  int jobs = 1;
  bool save_models = true;
};

/// Plans folds, retrains from scratch per fold, predicts and fuses the
/// held-out images, and computes metrics on the pooled predictions. Errors
/// propagate; when out_dir is set, whatever was finished is dumped first.
ConditionResult run_condition(const ExperimentCondition& condition, const ingest::Manifest& manifest,
                              std::uint64_t condition_seed, const RunOptions& options = {});

std::uint64_t condition_seed(const Experiment& experiment, const ExperimentCondition& condition);

struct SuiteResult {
  std::vector<ConditionResult> conditions;
};

/// Runs every condition; a failing condition is recorded and the suite goes
/// on. Writes results.csv / results.json and per-condition directories when
/// out_dir is set.
SuiteResult run_suite(const Experiment& experiment, const ingest::Manifest& manifest,
                      const std::filesystem::path& out_dir = {});

// One row per condition; no timings, so identical inputs give identical bytes.
std::string results_csv(const SuiteResult& suite);
nlohmann::json results_json(const SuiteResult& suite);

// Directory name for a condition ("OC/VC" -> "OC_VC").
std::string condition_dir_name(std::string_view name);

// Content hash over image ids, labels, patients and image bytes.
std::string corpus_hash(const ingest::Manifest& manifest);

}  // namespace cle::experiment
