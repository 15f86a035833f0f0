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
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "common/image.hpp"
#include "ingest/manifest.hpp"

namespace cle::synth {

struct SiteSpec {
  std::string name;
  double brightness_mean = 100.0;  // target mean pixel value inside the FOV
  double brightness_std = 5.0;     // per-image spread of that target
};

struct DatasetSpec {
  std::string id;
  int n_patients = 0;
  int sequences_per_patient = 2;
  int images_per_sequence = 2;
  std::vector<SiteSpec> sites;
};

// Cell-membrane texture parameters for one class. Cells are Voronoi regions
// whose boundaries render as bright membranes on a darker cytoplasm.
struct TextureSpec {
  bool regular = true;                // hex lattice (healthy) vs. packed discs of mixed size
  double cell_diameter_mean = 14.0;   // pixels
  double cell_diameter_std = 1.0;
  double jitter = 0.15;               // lattice jitter as a fraction of the diameter
  double membrane_width = 1.2;        // Gaussian sigma, pixels
  double membrane_break_prob = 0.0;   // fraction of cell borders rendered faint
  double interior_level = 0.3;        // cytoplasm intensity relative to membranes (1.0)
  double interior_std = 0.03;         // cell-to-cell spread of the cytoplasm level
};

struct SynthConfig {
  std::uint64_t seed = 0;
  int image_size = 320;
  double fov_radius = 150.0;
  double fov_center_jitter = 3.0;
  double noise_std = 4.0;
  double class_brightness_offset = 0.0;  // added to the carcinoma brightness target
  TextureSpec healthy;
  TextureSpec carcinoma;
  std::vector<DatasetSpec> datasets;
  int jobs = 1;

  void validate() const;
};

void to_json(nlohmann::json& j, const SynthConfig& c);
void from_json(const nlohmann::json& j, SynthConfig& c);
SynthConfig load_config(const std::filesystem::path& path);

/// Named configurations: "reference" (12-patient OC with darker cornified sites,
/// 5-patient VC), "brightness" (class correlates with brightness),
/// "texture-only" (one brightness for both classes) and "separable" (strongly
/// contrasting textures that a short training run can learn).
SynthConfig preset(std::string_view name);
std::vector<std::string> preset_names();

struct ImageTruth {
  std::string image_id;
  std::string dataset_id;
  std::string site;
  ingest::Label label = ingest::Label::kHealthy;
  double cx = 0.0;  // continuous frame, pixel (x, y) covers [x, x+1) x [y, y+1)
  double cy = 0.0;
  double radius = 0.0;
  double brightness_target = 0.0;
};

struct GroundTruth {
  SynthConfig config;
  std::vector<ImageTruth> images;
};

void to_json(nlohmann::json& j, const GroundTruth& g);
void from_json(const nlohmann::json& j, GroundTruth& g);

/// Renders one image. Exposed for fixtures that do not need a full corpus.
GrayImage render_image(const SynthConfig& config, const ImageTruth& truth, std::uint64_t seed);

struct GenerateResult {
  ingest::Manifest manifest;
  GroundTruth truth;
};

inline constexpr std::string_view kManifestName = "manifest.csv";
inline constexpr std::string_view kTruthName = "ground_truth.json";

/// Writes images/<image_id>.png, manifest.csv and ground_truth.json under
/// `out_dir`. A non-empty `out_dir` is rejected unless `force` is set.
GenerateResult generate(const SynthConfig& config, const std::filesystem::path& out_dir, bool force = false);

/// Reads the ground-truth sidecar of a generated corpus.
GroundTruth describe(const std::filesystem::path& corpus_dir);

}  // namespace cle::synth
