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

#include "evaluation/report_io.hpp"

#include <cmath>
#include <fstream>

#include "common/csv.hpp"
#include "common/error.hpp"
#include "common/format.hpp"

namespace cle::eval {
namespace fs = std::filesystem;

namespace {

nlohmann::json optional_json(const std::optional<double>& v) {
  if (v) return *v;
  return std::string(kUndefined);
}

std::string threshold_text(double t) {
  if (std::isinf(t)) return t > 0 ? "inf" : "-inf";
  return format_double(t);
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  return out;
}

}  // namespace

nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json roc = nlohmann::json::array();
  for (const auto& p : r.roc) roc.push_back({p.fpr, p.tpr, threshold_text(p.threshold)});
  nlohmann::json patients = nlohmann::json::object();
  for (const auto& [id, a] : r.per_patient) {
    patients[id] = {{"correct", a.correct}, {"total", a.total}, {"accuracy", a.accuracy()}};
  }
  return {{"condition", r.condition_name},
          {"n_images", r.n_images},
          {"confusion", {{"tp", r.counts.tp}, {"fp", r.counts.fp}, {"tn", r.counts.tn}, {"fn", r.counts.fn}}},
          {"accuracy", optional_json(r.accuracy)},
          {"precision", optional_json(r.precision)},
          {"recall", optional_json(r.recall)},
          {"auc", optional_json(r.auc)},
          {"roc", roc},
          {"per_patient_accuracy", patients}};
}

void write_roc_csv(const MetricsReport& report, const fs::path& path) {
  auto out = open_out(path);
  out << "fpr,tpr,threshold\n";
  for (const auto& p : report.roc) {
    out << format_double(p.fpr) << ',' << format_double(p.tpr) << ',' << threshold_text(p.threshold) << '\n';
  }
}

void write_per_patient_csv(const MetricsReport& report, const fs::path& path) {
  auto out = open_out(path);
  out << "patient_id,correct,total,accuracy\n";
  for (const auto& [id, a] : report.per_patient) {
    out << csv::join({id, std::to_string(a.correct), std::to_string(a.total), format_double(a.accuracy())}) << '\n';
  }
}

void write_report(const MetricsReport& report, const fs::path& json_path) {
  const fs::path dir = json_path.parent_path();
  if (!dir.empty()) fs::create_directories(dir);
  {
    auto out = open_out(json_path);
    out << to_json(report).dump(2) << '\n';
  }
  write_roc_csv(report, dir / "roc.csv");
  write_per_patient_csv(report, dir / "per_patient.csv");
}

std::vector<ScoredPrediction> to_scored(std::span<const fusion::PredictionRow> rows) {
  std::vector<ScoredPrediction> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back({r.label, r.fused_carcinoma_prob, r.decision, r.patient_id});
  return out;
}

}  // namespace cle::eval
