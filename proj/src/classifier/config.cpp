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

#include "classifier/config.hpp"

#include <fstream>
#include <set>

#include "classifier/network.hpp"
#include "common/error.hpp"

namespace cle::classifier {

NLOHMANN_JSON_SERIALIZE_ENUM(ClassifierKind, {{ClassifierKind::kCnn, "cnn"},
                                              {ClassifierKind::kMeanIntensity, "mean-intensity"}})
NLOHMANN_JSON_SERIALIZE_ENUM(ClassWeighting, {{ClassWeighting::kNone, "none"},
                                              {ClassWeighting::kInverseFrequency, "inverse-frequency"}})
NLOHMANN_JSON_SERIALIZE_ENUM(InputNormalization, {{InputNormalization::kUnitRange, "unit-range"},
                                                  {InputNormalization::kPerPatchStandardize, "per-patch-standardize"}})
NLOHMANN_JSON_SERIALIZE_ENUM(StepSchedule, {{StepSchedule::kConstant, "constant"}, {StepSchedule::kCosine, "cosine"}})

void ClassifierConfig::validate() const {
  if (patch_size < 8) fail(ErrorCode::kInvalidArgument, "patch_size must be at least 8");
  if (epochs < 0) fail(ErrorCode::kInvalidArgument, "epochs must be >= 0");
  if (!(initial_step_size > 0.0)) fail(ErrorCode::kInvalidArgument, "initial_step_size must be > 0");
  if (batch_size < 1) fail(ErrorCode::kInvalidArgument, "batch_size must be >= 1");
  if (optimizer != "adam") fail(ErrorCode::kInvalidArgument, "unsupported optimizer '" + optimizer + "'");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0 && epsilon > 0.0)) {
    fail(ErrorCode::kInvalidArgument, "invalid adaptive-moment parameters");
  }
  if (kind == ClassifierKind::kCnn) {
    nn::Network<float> probe({1, patch_size, patch_size}, layers);
    if (probe.output_size() != 2 || layers.back().type != nn::LayerType::kDense) {
      fail(ErrorCode::kInvalidArgument, "layer spec must end in a 2-unit dense layer");
    }
  }
}

void to_json(nlohmann::json& j, const ClassifierConfig& c) {
  j = {{"kind", c.kind},
       {"patch_size", c.patch_size},
       {"layers", c.layers},
       {"epochs", c.epochs},
       {"optimizer", c.optimizer},
       {"initial_step_size", c.initial_step_size},
       {"step_schedule", c.step_schedule},
       {"beta1", c.beta1},
       {"beta2", c.beta2},
       {"epsilon", c.epsilon},
       {"batch_size", c.batch_size},
       {"seed", c.seed},
       {"class_weighting", c.class_weighting},
       {"normalization", c.normalization},
       {"augment", c.augment}};
}

void from_json(const nlohmann::json& j, ClassifierConfig& c) {
  if (!j.is_object()) fail(ErrorCode::kInvalidArgument, "classifier config must be a JSON object");
  static const std::set<std::string> known = {"kind", "patch_size", "layers", "epochs", "optimizer",
                                              "initial_step_size", "step_schedule", "beta1", "beta2", "epsilon", "batch_size",
                                              "seed", "class_weighting", "normalization", "augment"};
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) fail(ErrorCode::kInvalidArgument, "unknown classifier config key '" + key + "'");
  }
  auto enum_field = [&](const char* key, auto& field) {
    if (!j.contains(key)) return;
    using E = std::decay_t<decltype(field)>;
    const auto text = j.at(key).get<std::string>();
    const E parsed = j.at(key).get<E>();
    // The enum serializer falls back to the first entry on unknown strings.
    if (nlohmann::json(parsed).get<std::string>() != text) {
      fail(ErrorCode::kInvalidArgument, std::string("unknown value '") + text + "' for " + key);
    }
    field = parsed;
  };
  try {
    enum_field("kind", c.kind);
    c.patch_size = j.value("patch_size", c.patch_size);
    if (j.contains("layers")) c.layers = j.at("layers").get<std::vector<nn::LayerSpec>>();
    c.epochs = j.value("epochs", c.epochs);
    c.optimizer = j.value("optimizer", c.optimizer);
    c.initial_step_size = j.value("initial_step_size", c.initial_step_size);
    enum_field("step_schedule", c.step_schedule);
    c.beta1 = j.value("beta1", c.beta1);
    c.beta2 = j.value("beta2", c.beta2);
    c.epsilon = j.value("epsilon", c.epsilon);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.seed = j.value("seed", c.seed);
    enum_field("class_weighting", c.class_weighting);
    enum_field("normalization", c.normalization);
    c.augment = j.value("augment", c.augment);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kInvalidArgument, std::string("invalid classifier config: ") + e.what());
  }
}

ClassifierConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open classifier config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kFormat, "classifier config '" + path + "' is not valid JSON: " + e.what());
  }
  ClassifierConfig c = j.get<ClassifierConfig>();
  c.validate();
  return c;
}

}  // namespace cle::classifier
