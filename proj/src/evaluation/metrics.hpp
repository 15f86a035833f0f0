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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ingest/manifest.hpp"

namespace cle::eval {

using ingest::Label;

/// One image-level outcome; carcinoma is the positive class.
struct ScoredPrediction {
  Label label = Label::kHealthy;
  double score = 0.0;  // fused carcinoma probability
  Label decision = Label::kHealthy;
  std::string patient_id;
};

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const noexcept { return tp + fp + tn + fn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;  // score >= threshold counts as positive; +-inf at the ends
};

struct PatientAccuracy {
  std::size_t correct = 0;
  std::size_t total = 0;

  double accuracy() const noexcept { return static_cast<double>(correct) / static_cast<double>(total); }
};

// Metrics with a zero denominator are std::nullopt and serialise as
// "undefined".
struct MetricsReport {
  std::string condition_name;
  std::size_t n_images = 0;
  ConfusionCounts counts;
  std::optional<double> accuracy;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> auc;
  std::vector<RocPoint> roc;
  std::map<std::string, PatientAccuracy> per_patient;
};

ConfusionCounts confusion(std::span<const ScoredPrediction> predictions);

/// Exact step ROC over every distinct score plus +-inf sentinels, ordered
/// from (0,0) to (1,1). Empty when either class is absent.
std::vector<RocPoint> roc_curve(std::span<const ScoredPrediction> predictions);

/// Trapezoidal area under roc_curve. Tied scores contribute one half, which
/// makes this equal to the Mann-Whitney pair statistic. nullopt when either
/// class is absent.
std::optional<double> roc_auc(std::span<const ScoredPrediction> predictions);

std::map<std::string, PatientAccuracy> per_patient_accuracy(std::span<const ScoredPrediction> predictions);

/// All metrics on the pooled prediction vector. Throws kInvalidArgument on
/// empty input.
MetricsReport compute_metrics(std::span<const ScoredPrediction> predictions, std::string condition_name = {});

// Sum of per-patient correct counts over sum of totals; equals the global
// accuracy whenever the breakdown is consistent.
double weighted_patient_accuracy(const std::map<std::string, PatientAccuracy>& per_patient);

}  // namespace cle::eval
