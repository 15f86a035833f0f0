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
#include <filesystem>
#include <string>
#include <vector>

#include "fusion/fusion.hpp"

namespace cle::fusion {

/// One row of the prediction dump.
struct PredictionRow {
  std::string image_id;
  std::string patient_id;
  std::string dataset_id;
  ingest::Label label = ingest::Label::kHealthy;
  double fused_carcinoma_prob = 0.0;
  ingest::Label decision = ingest::Label::kHealthy;
  std::size_t n_patches = 0;

  friend bool operator==(const PredictionRow&, const PredictionRow&) = default;
};

struct Exclusion {
  std::string image_id;
  std::string reason;
};

struct InferenceResult {
  std::vector<PredictionRow> rows;
  std::vector<Exclusion> excluded;
};

/// Detects the field of view, classifies and fuses every image of the
/// manifest in order. Images without a usable field of view or without a
/// patch are excluded and logged, never dropped silently.
InferenceResult predict_manifest(const classifier::PatchClassifier& classifier, const ingest::Manifest& manifest,
                                 FusionMethod method = FusionMethod::kMean, double threshold = kDefaultThreshold);

/// Labelled patches (stride = patch size) of every usable image, for
/// training. Unusable images are appended to `excluded` when given.
classifier::LabeledPatches collect_training_patches(const ingest::Manifest& manifest, int patch_size,
                                                    std::vector<Exclusion>* excluded = nullptr);

// Columns: image_id,patient_id,dataset_id,label,fused_carcinoma_prob,decision,n_patches
void write_predictions_csv(const std::vector<PredictionRow>& rows, const std::filesystem::path& path);
std::vector<PredictionRow> read_predictions_csv(const std::filesystem::path& path);

}  // namespace cle::fusion
