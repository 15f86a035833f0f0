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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cle::ingest {

enum class Label { kHealthy = 0, kCarcinoma = 1 };

std::string_view to_string(Label label) noexcept;
std::optional<Label> parse_label(std::string_view text) noexcept;

// "OC", "VC", or "SYNTH-<name>" with <name> drawn from [A-Za-z0-9_-].
bool is_valid_dataset_id(std::string_view id) noexcept;

struct ImageRecord {
  std::string image_id;
  std::filesystem::path path;  // absolute, lexically normalised
  std::string patient_id;
  std::string sequence_id;
  std::string dataset_id;
  std::string site;
  Label label = Label::kHealthy;

  friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

struct DatasetSummary {
  std::string dataset_id;
  std::size_t patients = 0;
  std::size_t sequences = 0;
  std::size_t images = 0;

  friend bool operator==(const DatasetSummary&, const DatasetSummary&) = default;
};

/// Validated, immutable list of image records.
///
/// Construction enforces unique image ids and that every sequence belongs to
/// exactly one patient and carries one label; violations throw
/// ErrorCode::kValidation. Soft deviations (e.g. an OC dataset whose shape
/// differs from 12 patients / 116 sequences) are kept as warnings.
class Manifest {
 public:
  Manifest() = default;
  explicit Manifest(std::vector<ImageRecord> records);

  const std::vector<ImageRecord>& records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }

  std::vector<DatasetSummary> summaries() const;
  std::vector<std::string> dataset_ids() const;
  std::vector<std::string> patient_ids() const;
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  friend bool operator==(const Manifest& a, const Manifest& b) { return a.records_ == b.records_; }

 private:
  std::vector<ImageRecord> records_;
  std::vector<std::string> warnings_;
};

inline constexpr std::string_view kManifestColumns[] = {
    "image_id", "path", "patient_id", "sequence_id", "dataset_id", "site", "label"};

struct LoadOptions {
  // Decode every referenced image and require single-channel 8-bit data.
  bool verify_images = true;
};

Manifest load_manifest(const std::filesystem::path& path, const LoadOptions& options = {});

// Writes paths relative to the directory of `path`.
void save_manifest(const Manifest& manifest, const std::filesystem::path& path);

// Keeps records whose dataset is in `dataset_ids` (and, when given, whose
// patient is in `patient_ids`), preserving order.
Manifest select(const Manifest& manifest, const std::vector<std::string>& dataset_ids,
                const std::optional<std::vector<std::string>>& patient_ids = std::nullopt);

}  // namespace cle::ingest
