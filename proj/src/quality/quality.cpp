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

#include "quality/quality.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include "common/csv.hpp"
#include "common/error.hpp"
#include "common/format.hpp"
#include "common/log.hpp"

namespace cle::quality {
namespace fs = std::filesystem;

std::string_view to_string(GroupBy g) noexcept { return g == GroupBy::kSite ? "site" : "dataset"; }

std::optional<GroupBy> parse_group_by(std::string_view text) noexcept {
  if (text == "site") return GroupBy::kSite;
  if (text == "dataset") return GroupBy::kDataset;
  return std::nullopt;
}

namespace {

std::uint8_t lower_median(const std::array<std::size_t, 256>& counts, std::size_t n) {
  if (n == 0) fail(ErrorCode::kInvalidArgument, "mask selects no pixel");
  const std::size_t rank = (n - 1) / 2;
  std::size_t seen = 0;
  for (int v = 0; v < 256; ++v) {
    seen += counts[v];
    if (seen > rank) return static_cast<std::uint8_t>(v);
  }
  return 255;
}

}  // namespace

std::uint8_t median_pixel(const GrayImage& image, const fov::FovMask& mask) {
  if (!mask.is_disk() && (mask.mask_width() != image.width() || mask.mask_height() != image.height())) {
    fail(ErrorCode::kSizeMismatch, "mask and image dimensions differ");
  }
  std::array<std::size_t, 256> counts{};
  std::size_t n = 0;
  for (int y = 0; y < image.height(); ++y) {
    auto row = image.row(y);
    for (int x = 0; x < image.width(); ++x) {
      if (mask.contains_pixel(x, y)) {
        ++counts[row[x]];
        ++n;
      }
    }
  }
  return lower_median(counts, n);
}

std::uint8_t median_pixel(const GrayImage& image) {
  std::array<std::size_t, 256> counts{};
  for (auto v : image.pixels()) ++counts[v];
  return lower_median(counts, image.size());
}

int bin_index(int value, int bins) noexcept {
  return std::min(value * bins / 255, bins - 1);
}

std::vector<ImageMedian> image_medians(const ingest::Manifest& manifest, const MedianOptions& options) {
  std::vector<ImageMedian> out;
  for (const auto& rec : manifest.records()) {
    const GrayImage image = read_image(rec.path);
    std::uint8_t median = 0;
    if (options.include_outside_fov) {
      median = median_pixel(image);
    } else {
      try {
        median = median_pixel(image, fov::detect_fov(image, 8));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kDegenerate) throw;
        log::warn("skipping '" + rec.image_id + "' in quality analysis: " + e.what());
        continue;
      }
    }
    out.push_back({rec.image_id, rec.dataset_id, rec.site, rec.label, median});
  }
  return out;
}

std::vector<Histogram> grouped_histogram(const std::vector<ImageMedian>& medians, const ingest::Manifest& manifest,
                                         GroupBy group_by, int bins, std::optional<ingest::Label> label) {
  if (bins < 1 || bins > 256) fail(ErrorCode::kInvalidArgument, "bins must be in [1, 256]");
  std::unordered_map<std::string, const ImageMedian*> by_id;
  for (const auto& m : medians) by_id[m.image_id] = &m;

  std::map<std::string, std::vector<std::size_t>> counts;
  for (const auto& rec : manifest.records()) {
    const std::string key = group_by == GroupBy::kSite ? rec.site : rec.dataset_id;
    auto& c = counts[key];
    if (c.empty()) c.assign(bins, 0);
    if (label && rec.label != *label) continue;
    auto it = by_id.find(rec.image_id);
    if (it != by_id.end()) ++c[bin_index(it->second->median, bins)];
  }

  std::vector<Histogram> out;
  for (const auto& [key, c] : counts) {
    std::size_t total = 0;
    for (auto v : c) total += v;
    if (total == 0) {
      log::warn("group '" + key + "' has no images with a median value; omitted");
      continue;
    }
    Histogram h{key, total, std::vector<double>(bins, 0.0)};
    for (int b = 0; b < bins; ++b) h.weights[b] = static_cast<double>(c[b]) / static_cast<double>(total);
    out.push_back(std::move(h));
  }
  return out;
}

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  return out;
}

void write_svg(const QualityStats& stats, GroupBy group_by, const fs::path& path) {
  constexpr double kW = 640, kH = 360, kLeft = 56, kRight = 140, kTop = 20, kBottom = 40;
  constexpr double kFloorDecades = 3.0;  // y axis spans [1e-3, 1]
  static constexpr const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                            "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
  const int bins = stats.bins;
  auto y_of = [&](double w) {
    const double d = std::clamp(std::log10(w), -kFloorDecades, 0.0);
    return kTop + ph * (-d / kFloorDecades);
  };

  auto out = open_out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << kW << "\" height=\"" << kH << "\" fill=\"white\"/>\n";
  for (int d = 0; d <= 3; ++d) {
    const double y = kTop + ph * d / kFloorDecades;
    out << "<line x1=\"" << kLeft << "\" y1=\"" << y << "\" x2=\"" << kLeft + pw << "\" y2=\"" << y
        << "\" stroke=\"#ddd\"/>\n";
    out << "<text x=\"" << kLeft - 6 << "\" y=\"" << y + 4 << "\" font-size=\"11\" text-anchor=\"end\">1e-" << d
        << "</text>\n";
  }
  const std::size_t groups = stats.histograms.size();
  const double bin_w = pw / bins;
  for (std::size_t g = 0; g < groups; ++g) {
    const auto& h = stats.histograms[g];
    const char* color = kColors[g % std::size(kColors)];
    for (int b = 0; b < bins; ++b) {
      if (h.weights[b] <= 0.0) continue;
      const double x = kLeft + b * bin_w + bin_w * g / static_cast<double>(groups);
      const double y = y_of(h.weights[b]);
      out << "<rect x=\"" << format_fixed(x, 2) << "\" y=\"" << format_fixed(y, 2) << "\" width=\""
          << format_fixed(bin_w / groups, 2) << "\" height=\"" << format_fixed(kTop + ph - y, 2) << "\" fill=\""
          << color << "\" fill-opacity=\"0.8\"/>\n";
    }
    out << "<rect x=\"" << kW - kRight + 10 << "\" y=\"" << kTop + 16 * g << "\" width=\"10\" height=\"10\" fill=\""
        << color << "\"/>\n";
    out << "<text x=\"" << kW - kRight + 24 << "\" y=\"" << kTop + 16 * g + 9 << "\" font-size=\"11\">" << h.group
        << "</text>\n";
  }
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + ph << "\" x2=\"" << kLeft + pw << "\" y2=\"" << kTop + ph
      << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kH - 8
      << "\" font-size=\"12\" text-anchor=\"middle\">median pixel value (0-255), grouped by " << to_string(group_by)
      << "</text>\n";
  out << "</svg>\n";
}

}  // namespace

void write_quality(const QualityStats& stats, GroupBy group_by, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  {
    auto out = open_out(out_dir / "medians.csv");
    out << "image_id,dataset_id,site,label,median\n";
    for (const auto& m : stats.per_image) {
      out << csv::join({m.image_id, m.dataset_id, m.site, std::string(ingest::to_string(m.label)),
                        std::to_string(m.median)})
          << '\n';
    }
  }
  const std::string name = std::string("histogram_") + std::string(to_string(group_by));
  {
    auto out = open_out(out_dir / (name + ".csv"));
    out << "group,bin,bin_low,bin_high,weight,log10_weight\n";
    for (const auto& h : stats.histograms) {
      for (int b = 0; b < stats.bins; ++b) {
        const double lo = 255.0 * b / stats.bins, hi = 255.0 * (b + 1) / stats.bins;
        const double w = h.weights[b];
        out << csv::join({h.group, std::to_string(b), format_double(lo), format_double(hi), format_double(w),
                          w > 0.0 ? format_double(std::log10(w)) : std::string("-inf")})
            << '\n';
      }
    }
  }
  write_svg(stats, group_by, out_dir / (name + ".svg"));
}

}  // namespace cle::quality
