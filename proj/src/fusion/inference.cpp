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

#include "fusion/inference.hpp"

#include <fstream>
#include <map>

#include "common/csv.hpp"
#include "common/error.hpp"
#include "common/format.hpp"
#include "common/log.hpp"

namespace cle::fusion {
namespace fs = std::filesystem;

namespace {
constexpr const char* kColumns[] = {"image_id", "patient_id", "dataset_id", "label",
                                    "fused_carcinoma_prob", "decision", "n_patches"};
}

InferenceResult predict_manifest(const classifier::PatchClassifier& classifier, const ingest::Manifest& manifest,
                                 FusionMethod method, double threshold) {
  InferenceResult result;
  for (const auto& rec : manifest.records()) {
    try {
      const GrayImage image = read_image(rec.path);
      const auto mask = fov::detect_fov(image, classifier.patch_size());
      const auto pred = classify_image(image, mask, classifier, method, threshold, rec.image_id);
      result.rows.push_back({rec.image_id, rec.patient_id, rec.dataset_id, rec.label, pred.fused.carcinoma,
                             pred.decision, pred.patch_probabilities.size()});
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerate) throw;
      log::warn("excluding image '" + rec.image_id + "': " + e.what());
      result.excluded.push_back({rec.image_id, e.what()});
    }
  }
  return result;
}

classifier::LabeledPatches collect_training_patches(const ingest::Manifest& manifest, int patch_size,
                                                    std::vector<Exclusion>* excluded) {
  classifier::LabeledPatches data;
  data.patch_size = patch_size;
  for (const auto& rec : manifest.records()) {
    const GrayImage image = read_image(rec.path);
    try {
      const auto set = fov::extract_patches(image, fov::detect_fov(image, patch_size), patch_size, patch_size,
                                            rec.image_id);
      if (set.empty()) fail(ErrorCode::kDegenerate, "image has no usable patches");
      data.append(set, rec.label);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerate) throw;
      log::warn("excluding image '" + rec.image_id + "' from training: " + e.what());
      if (excluded) excluded->push_back({rec.image_id, e.what()});
    }
  }
  return data;
}

void write_predictions_csv(const std::vector<PredictionRow>& rows, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  out << "image_id,patient_id,dataset_id,label,fused_carcinoma_prob,decision,n_patches\n";
  for (const auto& r : rows) {
    out << csv::join({r.image_id, r.patient_id, r.dataset_id, std::string(ingest::to_string(r.label)),
                      format_double(r.fused_carcinoma_prob), std::string(ingest::to_string(r.decision)),
                      std::to_string(r.n_patches)})
        << '\n';
  }
  if (!out) fail(ErrorCode::kIo, "cannot write '" + path.string() + "'");
}

std::vector<PredictionRow> read_predictions_csv(const fs::path& path) {
  const auto rows = csv::read_file(path);
  if (rows.empty()) fail(ErrorCode::kFormat, "'" + path.string() + "' has no header row");
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < rows[0].fields.size(); ++i) col[rows[0].fields[i]] = i;
  for (const char* c : kColumns) {
    if (!col.contains(c)) fail(ErrorCode::kFormat, std::string("prediction file lacks column '") + c + "'");
  }
  std::vector<PredictionRow> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i].fields;
    const std::string where = "'" + path.string() + "' line " + std::to_string(rows[i].line);
    if (f.size() != rows[0].fields.size()) fail(ErrorCode::kFormat, where + ": wrong field count");
    PredictionRow r;
    r.image_id = f[col["image_id"]];
    r.patient_id = f[col["patient_id"]];
    r.dataset_id = f[col["dataset_id"]];
    const auto label = ingest::parse_label(f[col["label"]]);
    const auto decision = ingest::parse_label(f[col["decision"]]);
    const auto prob = parse_double(f[col["fused_carcinoma_prob"]]);
    const auto n = parse_int(f[col["n_patches"]]);
    if (!label || !decision || !prob || !n || *n < 0) fail(ErrorCode::kFormat, where + ": malformed value");
    r.label = *label;
    r.decision = *decision;
    r.fused_carcinoma_prob = *prob;
    r.n_patches = static_cast<std::size_t>(*n);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace cle::fusion
