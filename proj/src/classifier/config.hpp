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
#include <string>
#include <vector>

#include <json.hpp>

#include "classifier/layer_spec.hpp"

namespace cle::classifier {

enum class ClassifierKind { kCnn, kMeanIntensity };
enum class ClassWeighting { kNone, kInverseFrequency };
enum class InputNormalization { kUnitRange, kPerPatchStandardize };
enum class StepSchedule { kConstant, kCosine };

struct ClassifierConfig {
  ClassifierKind kind = ClassifierKind::kCnn;
  int patch_size = 80;
  std::vector<nn::LayerSpec> layers = nn::default_layers();
  int epochs = 60;
  std::string optimizer = "adam";
  double initial_step_size = 0.01;
  // Cosine decays the step size from its initial value to zero over the run.
  StepSchedule step_schedule = StepSchedule::kCosine;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 32;
  std::uint64_t seed = 0;
  ClassWeighting class_weighting = ClassWeighting::kInverseFrequency;
  InputNormalization normalization = InputNormalization::kUnitRange;
  // Random 90-degree rotations and flips of training patches.
  bool augment = false;

  // Throws kInvalidArgument on an unusable configuration.
  void validate() const;

  friend bool operator==(const ClassifierConfig&, const ClassifierConfig&) = default;
};

// Missing keys keep their defaults; unknown keys are rejected.
void to_json(nlohmann::json& j, const ClassifierConfig& c);
void from_json(const nlohmann::json& j, ClassifierConfig& c);

ClassifierConfig load_config(const std::string& path);

}  // namespace cle::classifier
