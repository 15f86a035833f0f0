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
#include <string>
#include <vector>

#include "ingest/manifest.hpp"

namespace cle::fov {

struct ExportSummary {
  std::size_t images = 0;
  std::size_t patches = 0;
  std::vector<std::string> skipped;  // "<image_id>: <reason>"
};

/// Writes `<image_id>_<x>_<y>.png` tiles plus `index.csv` into `out_dir`.
/// Images without a usable field of view are skipped and reported.
ExportSummary export_patches(const ingest::Manifest& manifest, int patch_size, int stride,
                             const std::filesystem::path& out_dir);

}  // namespace cle::fov
