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

#include "ingest/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "common/csv.hpp"
#include "common/error.hpp"
#include "common/image.hpp"
#include "common/log.hpp"

namespace cle::ingest {
namespace fs = std::filesystem;

namespace {

struct ReferenceShape {
  std::string_view dataset;
  std::size_t patients;
  std::size_t sequences;
};

constexpr ReferenceShape kReferenceShapes[] = {{"OC", 12, 116}, {"VC", 5, 73}};

}  // namespace

std::string_view to_string(Label label) noexcept {
  return label == Label::kCarcinoma ? "carcinoma" : "healthy";
}

std::optional<Label> parse_label(std::string_view text) noexcept {
  if (text == "healthy") return Label::kHealthy;
  if (text == "carcinoma") return Label::kCarcinoma;
  return std::nullopt;
}

bool is_valid_dataset_id(std::string_view id) noexcept {
  if (id == "OC" || id == "VC") return true;
  constexpr std::string_view prefix = "SYNTH-";
  if (!id.starts_with(prefix) || id.size() == prefix.size()) return false;
  return std::all_of(id.begin() + prefix.size(), id.end(), [](char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' ||
           c == '-';
  });
}

Manifest::Manifest(std::vector<ImageRecord> records) : records_(std::move(records)) {
  std::unordered_set<std::string> ids;
  struct SequenceOwner {
    std::string patient;
    Label label;
    std::string dataset;
  };
  std::unordered_map<std::string, SequenceOwner> sequences;
  for (const auto& r : records_) {
    if (r.image_id.empty()) fail(ErrorCode::kValidation, "empty image_id");
    if (r.patient_id.empty() || r.sequence_id.empty()) {
      fail(ErrorCode::kValidation, "image '" + r.image_id + "' has an empty patient or sequence id");
    }
    if (!is_valid_dataset_id(r.dataset_id)) {
      fail(ErrorCode::kValidation, "image '" + r.image_id + "' has invalid dataset_id '" + r.dataset_id + "'");
    }
    if (!ids.insert(r.image_id).second) {
      fail(ErrorCode::kValidation, "duplicate image_id '" + r.image_id + "'");
    }
    auto [it, inserted] = sequences.try_emplace(r.sequence_id, SequenceOwner{r.patient_id, r.label, r.dataset_id});
    if (!inserted) {
      if (it->second.patient != r.patient_id) {
        fail(ErrorCode::kValidation, "sequence maps to two patients: '" + r.sequence_id + "' ('" +
                                         it->second.patient + "', '" + r.patient_id + "')");
      }
      if (it->second.label != r.label) {
        fail(ErrorCode::kValidation, "sequence '" + r.sequence_id + "' carries two labels");
      }
      if (it->second.dataset != r.dataset_id) {
        fail(ErrorCode::kValidation, "sequence '" + r.sequence_id + "' spans two datasets");
      }
    }
  }
  for (const auto& s : summaries()) {
    for (const auto& shape : kReferenceShapes) {
      if (s.dataset_id == shape.dataset && (s.patients != shape.patients || s.sequences != shape.sequences)) {
        warnings_.push_back("dataset " + s.dataset_id + " has " + std::to_string(s.patients) + " patients / " +
                            std::to_string(s.sequences) + " sequences (reference shape " +
                            std::to_string(shape.patients) + " / " + std::to_string(shape.sequences) + ")");
      }
    }
  }
}

std::vector<DatasetSummary> Manifest::summaries() const {
  struct Acc {
    std::set<std::string> patients;
    std::set<std::string> sequences;
    std::size_t images = 0;
  };
  std::map<std::string, Acc> acc;
  for (const auto& r : records_) {
    auto& a = acc[r.dataset_id];
    a.patients.insert(r.patient_id);
    a.sequences.insert(r.sequence_id);
    ++a.images;
  }
  std::vector<DatasetSummary> out;
  for (const auto& [id, a] : acc) out.push_back({id, a.patients.size(), a.sequences.size(), a.images});
  return out;
}

std::vector<std::string> Manifest::dataset_ids() const {
  std::set<std::string> s;
  for (const auto& r : records_) s.insert(r.dataset_id);
  return {s.begin(), s.end()};
}

std::vector<std::string> Manifest::patient_ids() const {
  std::set<std::string> s;
  for (const auto& r : records_) s.insert(r.patient_id);
  return {s.begin(), s.end()};
}

Manifest load_manifest(const fs::path& path, const LoadOptions& options) {
  if (!fs::exists(path)) fail(ErrorCode::kIo, "manifest '" + path.string() + "' does not exist");
  const auto rows = csv::read_file(path);
  if (rows.empty()) fail(ErrorCode::kFormat, "manifest '" + path.string() + "' has no header row");

  const auto& header = rows.front().fields;
  std::map<std::string_view, std::size_t> column;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (!column.emplace(header[i], i).second) {
      fail(ErrorCode::kFormat, "duplicate column '" + header[i] + "' in manifest header");
    }
  }
  if (column.size() != std::size(kManifestColumns) ||
      !std::all_of(std::begin(kManifestColumns), std::end(kManifestColumns),
                   [&](std::string_view c) { return column.contains(c); })) {
    fail(ErrorCode::kFormat,
         "manifest header must be exactly: image_id,path,patient_id,sequence_id,dataset_id,site,label");
  }

  const fs::path base = fs::absolute(path).parent_path();
  std::vector<ImageRecord> records;
  records.reserve(rows.size() - 1);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    const std::string where = "manifest line " + std::to_string(row.line);
    if (row.fields.size() != header.size()) {
      fail(ErrorCode::kFormat, where + ": expected " + std::to_string(header.size()) + " fields, got " +
                                   std::to_string(row.fields.size()));
    }
    auto get = [&](std::string_view c) -> const std::string& { return row.fields[column.at(c)]; };
    ImageRecord r;
    r.image_id = get("image_id");
    r.patient_id = get("patient_id");
    r.sequence_id = get("sequence_id");
    r.dataset_id = get("dataset_id");
    r.site = get("site");
    const auto label = parse_label(get("label"));
    if (!label) fail(ErrorCode::kValidation, where + ": unknown label '" + get("label") + "'");
    r.label = *label;
    fs::path p = get("path");
    r.path = (p.is_absolute() ? p : base / p).lexically_normal();
    if (!fs::exists(r.path)) {
      fail(ErrorCode::kIo, where + " (image '" + r.image_id + "'): missing file '" + r.path.string() + "'");
    }
    if (options.verify_images) {
      try {
        (void)read_image(r.path);
      } catch (const Error& e) {
        fail(e.code(), where + " (image '" + r.image_id + "'): " + e.what());
      }
    }
    records.push_back(std::move(r));
  }
  Manifest m(std::move(records));
  for (const auto& w : m.warnings()) log::warn(w);
  return m;
}

void save_manifest(const Manifest& manifest, const fs::path& path) {
  const fs::path base = fs::absolute(path).parent_path().lexically_normal();
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot write manifest '" + path.string() + "'");
  out << "image_id,path,patient_id,sequence_id,dataset_id,site,label\n";
  for (const auto& r : manifest.records()) {
    fs::path rel = r.path.lexically_relative(base);
    if (rel.empty()) rel = r.path;
    out << csv::join({r.image_id, rel.generic_string(), r.patient_id, r.sequence_id, r.dataset_id, r.site,
                      std::string(to_string(r.label))})
        << '\n';
  }
  if (!out) fail(ErrorCode::kIo, "cannot write manifest '" + path.string() + "'");
}

Manifest select(const Manifest& manifest, const std::vector<std::string>& dataset_ids,
                const std::optional<std::vector<std::string>>& patient_ids) {
  const auto present = manifest.dataset_ids();
  for (const auto& d : dataset_ids) {
    if (!std::binary_search(present.begin(), present.end(), d)) {
      fail(ErrorCode::kNotFound, "unknown dataset_id '" + d + "'");
    }
  }
  const std::unordered_set<std::string> want_d(dataset_ids.begin(), dataset_ids.end());
  std::optional<std::unordered_set<std::string>> want_p;
  if (patient_ids) want_p.emplace(patient_ids->begin(), patient_ids->end());
  std::vector<ImageRecord> kept;
  for (const auto& r : manifest.records()) {
    if (!want_d.contains(r.dataset_id)) continue;
    if (want_p && !want_p->contains(r.patient_id)) continue;
    kept.push_back(r);
  }
  if (kept.empty()) log::warn("selection is empty");
  return Manifest(std::move(kept));
}

}  // namespace cle::ingest
