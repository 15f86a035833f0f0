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

#include "fov/patch_export.hpp"

#include <fstream>

#include "common/csv.hpp"
#include "common/error.hpp"
#include "common/image.hpp"
#include "common/log.hpp"
#include "fov/fov.hpp"

namespace cle::fov {
namespace fs = std::filesystem;

ExportSummary export_patches(const ingest::Manifest& manifest, int patch_size, int stride,
                             const fs::path& out_dir) {
  if (stride <= 0) stride = patch_size;
  fs::create_directories(out_dir);
  std::ofstream index(out_dir / "index.csv", std::ios::binary);
  if (!index) fail(ErrorCode::kIo, "cannot write '" + (out_dir / "index.csv").string() + "'");
  index << "file,image_id,x,y,patch_size,patient_id,sequence_id,dataset_id,site,label\n";

  ExportSummary summary;
  for (const auto& rec : manifest.records()) {
    const GrayImage image = read_image(rec.path);
    PatchSet set;
    try {
      set = extract_patches(image, detect_fov(image, patch_size), patch_size, stride, rec.image_id);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerate) throw;
      summary.skipped.push_back(rec.image_id + ": " + e.what());
      log::warn("skipping '" + rec.image_id + "': " + e.what());
      continue;
    }
    ++summary.images;
    for (std::size_t k = 0; k < set.size(); ++k) {
      const auto [x, y] = set.origins[k];
      const std::string name = rec.image_id + "_" + std::to_string(x) + "_" + std::to_string(y) + ".png";
      auto px = set.patch(k);
      write_png(out_dir / name, GrayImage(patch_size, patch_size, {px.begin(), px.end()}));
      index << csv::join({name, rec.image_id, std::to_string(x), std::to_string(y), std::to_string(patch_size),
                          rec.patient_id, rec.sequence_id, rec.dataset_id, rec.site,
                          std::string(ingest::to_string(rec.label))})
            << '\n';
      ++summary.patches;
    }
  }
  return summary;
}

}  // namespace cle::fov
