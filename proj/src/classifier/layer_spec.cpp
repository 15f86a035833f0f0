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

#include "classifier/layer_spec.hpp"

#include "common/error.hpp"

namespace cle::nn {

std::vector<LayerSpec> default_layers() {
  return {LayerSpec::conv(32, 3), LayerSpec::relu(),        LayerSpec::conv(32, 3),
          LayerSpec::relu(),      LayerSpec::max_pool(2),   LayerSpec::conv(64, 3),
          LayerSpec::relu(),      LayerSpec::max_pool(2),   LayerSpec::global_avg_pool(),
          LayerSpec::dense(64),   LayerSpec::relu(),        LayerSpec::dense(2)};
}

void to_json(nlohmann::json& j, const LayerSpec& spec) {
  switch (spec.type) {
    case LayerType::kConv:
      j = {{"type", "conv"}, {"filters", spec.filters}, {"kernel", spec.kernel}};
      break;
    case LayerType::kRelu:
      j = {{"type", "relu"}};
      break;
    case LayerType::kMaxPool:
      j = {{"type", "maxpool"}, {"size", spec.kernel}};
      break;
    case LayerType::kGlobalAvgPool:
      j = {{"type", "gap"}};
      break;
    case LayerType::kDense:
      j = {{"type", "dense"}, {"units", spec.filters}};
      break;
  }
}

void from_json(const nlohmann::json& j, LayerSpec& spec) {
  const auto type = j.at("type").get<std::string>();
  if (type == "conv") {
    spec = LayerSpec::conv(j.at("filters").get<int>(), j.value("kernel", 3));
  } else if (type == "relu") {
    spec = LayerSpec::relu();
  } else if (type == "maxpool") {
    spec = LayerSpec::max_pool(j.value("size", 2));
  } else if (type == "gap") {
    spec = LayerSpec::global_avg_pool();
  } else if (type == "dense") {
    spec = LayerSpec::dense(j.at("units").get<int>());
  } else {
    fail(ErrorCode::kInvalidArgument, "unknown layer type '" + type + "'");
  }
}

}  // namespace cle::nn
