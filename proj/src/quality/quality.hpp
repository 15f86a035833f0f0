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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "common/image.hpp"
#include "fov/fov.hpp"
#include "ingest/manifest.hpp"

namespace cle::quality {

enum class GroupBy { kSite, kDataset };

std::string_view to_string(GroupBy g) noexcept;
std::optional<GroupBy> parse_group_by(std::string_view text) noexcept;

inline constexpr int kDefaultBins = 32;

/// Median of the pixels selected by `mask`; for an even count the lower of
/// the two middle values. Throws kInvalidArgument if the mask selects nothing.
std::uint8_t median_pixel(const GrayImage& image, const fov::FovMask& mask);
std::uint8_t median_pixel(const GrayImage& image);

struct ImageMedian {
  std::string image_id;
  std::string dataset_id;
  std::string site;
  ingest::Label label = ingest::Label::kHealthy;
  std::uint8_t median = 0;
};

struct Histogram {
  std::string group;
  std::size_t images = 0;
  std::vector<double> weights;  // sums to 1
};

struct QualityStats {
  std::vector<ImageMedian> per_image;
  std::vector<Histogram> histograms;
  int bins = kDefaultBins;
};

// Bin of `value` among `bins` uniform bins spanning [0, 255]; 255 falls in
// the last bin.
int bin_index(int value, int bins) noexcept;

struct MedianOptions {
  // Use every pixel instead of only the detected field of view.
  bool include_outside_fov = false;
};

/// Per-image medians in manifest order. Images without a detectable field of
/// view are skipped with a warning.
std::vector<ImageMedian> image_medians(const ingest::Manifest& manifest, const MedianOptions& options = {});

/// Normalised histogram of median values per group, groups sorted by key.
/// `label` restricts the images considered (e.g. healthy tissue only).
std::vector<Histogram> grouped_histogram(const std::vector<ImageMedian>& medians, const ingest::Manifest& manifest,
                                         GroupBy group_by, int bins = kDefaultBins,
                                         std::optional<ingest::Label> label = std::nullopt);

/// medians.csv, histogram_<group>.csv (with a log10 column for plotting) and
/// histogram_<group>.svg drawn on a logarithmic axis.
void write_quality(const QualityStats& stats, GroupBy group_by, const std::filesystem::path& out_dir);

}  // namespace cle::quality
