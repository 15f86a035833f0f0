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

#include <filesystem>
#include <span>

#include <json.hpp>

#include "evaluation/metrics.hpp"
#include "fusion/inference.hpp"

namespace cle::eval {

nlohmann::json to_json(const MetricsReport& report);

void write_roc_csv(const MetricsReport& report, const std::filesystem::path& path);
void write_per_patient_csv(const MetricsReport& report, const std::filesystem::path& path);

// report.json plus roc.csv and per_patient.csv next to it.
void write_report(const MetricsReport& report, const std::filesystem::path& json_path);

std::vector<ScoredPrediction> to_scored(std::span<const fusion::PredictionRow> rows);

}  // namespace cle::eval
