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

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "common/image.hpp"

namespace cle::fov {

// Pixel (x, y) covers the continuous square [x, x+1) x [y, y+1); geometry
// below (disk centre, patch corners) lives in that continuous frame.

struct Disk {
  double cx = 0.0;
  double cy = 0.0;
  double radius = 0.0;
};

struct Origin {
  int x = 0;
  int y = 0;

  friend bool operator==(const Origin&, const Origin&) = default;
  // Row-major: y first, then x.
  friend auto operator<=>(const Origin& a, const Origin& b) {
    if (auto c = a.y <=> b.y; c != 0) return c;
    return a.x <=> b.x;
  }
};

/// Circular field of view, either as an analytic disk or an explicit
/// per-pixel mask (which may be non-convex).
class FovMask {
 public:
  static FovMask disk(double cx, double cy, double radius);
  static FovMask explicit_mask(int width, int height, std::vector<std::uint8_t> mask);

  bool is_disk() const noexcept { return explicit_.empty(); }
  const Disk& disk_geometry() const noexcept { return disk_; }
  int mask_width() const noexcept { return width_; }
  int mask_height() const noexcept { return height_; }
  std::span<const std::uint8_t> mask_bits() const noexcept { return explicit_; }

  bool contains_pixel(int x, int y) const noexcept;
  double area() const noexcept;

  // Top-left of the FOV bounding box; the patch grid is anchored here.
  Origin grid_anchor() const noexcept;

  // Throws kInvalidArgument if the mask cannot be applied to `image`.
  void check_compatible(const GrayImage& image) const;

 private:
  FovMask() = default;

  Disk disk_;
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> explicit_;
};

struct PatchSet {
  std::string image_id;
  int patch_size = 0;
  int stride = 0;
  std::vector<Origin> origins;
  std::vector<std::uint8_t> pixels;  // origins.size() blocks of patch_size^2, row-major

  std::size_t size() const noexcept { return origins.size(); }
  bool empty() const noexcept { return origins.empty(); }
  std::span<const std::uint8_t> patch(std::size_t i) const {
    const std::size_t n = static_cast<std::size_t>(patch_size) * static_cast<std::size_t>(patch_size);
    return std::span<const std::uint8_t>(pixels).subspan(i * n, n);
  }
};

inline constexpr int kDefaultPatchSize = 80;
inline constexpr std::uint8_t kBackgroundThreshold = 2;
inline constexpr double kBackgroundFraction = 0.99;

/// Estimates the disk-shaped field of view.
///
/// The centre is the centroid of foreground pixels (value above
/// kBackgroundThreshold). The radius is found by shrinking a disk from the
/// farthest pixel inwards for as long as at least 99% of the pixels left
/// outside it are background. An image without background pixels maps to its
/// inscribed disk. Throws ErrorCode::kDegenerate ("no usable field of view")
/// when the image has no foreground or the disk cannot hold one patch.
FovMask detect_fov(const GrayImage& image, int patch_size = kDefaultPatchSize);

/// Grid-aligned patches fully inside the mask, ordered row-major by origin.
/// `stride` <= 0 selects stride = patch_size.
PatchSet extract_patches(const GrayImage& image, const FovMask& mask, int patch_size = kDefaultPatchSize,
                         int stride = 0, std::string image_id = {});

// Corner test for the disk form; exposed for oracles and diagnostics.
bool square_inside_disk(const Disk& disk, int x, int y, int size) noexcept;

/// floor(area / cell^2) with cell = min(stride, patch_size). Every extracted
/// patch owns a disjoint cell x cell square inside the mask, so the extracted
/// count never exceeds this.
std::size_t patch_count_upper_bound(const FovMask& mask, int patch_size, int stride);

}  // namespace cle::fov
