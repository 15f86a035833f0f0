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

#include <string>
#include <vector>

#include <json.hpp>

namespace cle::nn {

enum class LayerType { kConv, kRelu, kMaxPool, kGlobalAvgPool, kDense };

/// One entry of a sequential network description. Convolutions are "valid"
/// (no padding) with unit stride; the network ends in an implicit softmax.
struct LayerSpec {
  LayerType type = LayerType::kRelu;
  int filters = 0;  // conv output channels / dense units
  int kernel = 0;   // conv kernel size, or pooling window

  static LayerSpec conv(int filters, int kernel) { return {LayerType::kConv, filters, kernel}; }
  static LayerSpec relu() { return {LayerType::kRelu, 0, 0}; }
  static LayerSpec max_pool(int size) { return {LayerType::kMaxPool, 0, size}; }
  static LayerSpec global_avg_pool() { return {LayerType::kGlobalAvgPool, 0, 0}; }
  static LayerSpec dense(int units) { return {LayerType::kDense, units, 0}; }

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

// conv3x3x32, relu, conv3x3x32, relu, pool2, conv3x3x64, relu, pool2, gap,
// dense64, relu, dense2.
std::vector<LayerSpec> default_layers();

void to_json(nlohmann::json& j, const LayerSpec& spec);
void from_json(const nlohmann::json& j, LayerSpec& spec);

}  // namespace cle::nn
