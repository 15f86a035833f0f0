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

#include "fov/fov.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "common/error.hpp"
#include "common/log.hpp"

namespace cle::fov {

FovMask FovMask::disk(double cx, double cy, double radius) {
  if (!(radius > 0.0) || !std::isfinite(cx) || !std::isfinite(cy) || !std::isfinite(radius)) {
    fail(ErrorCode::kInvalidArgument, "disk field of view needs a finite positive radius");
  }
  FovMask m;
  m.disk_ = {cx, cy, radius};
  return m;
}

FovMask FovMask::explicit_mask(int width, int height, std::vector<std::uint8_t> mask) {
  if (width <= 0 || height <= 0 || mask.size() != static_cast<std::size_t>(width) * height) {
    fail(ErrorCode::kInvalidArgument, "explicit mask size does not match its dimensions");
  }
  if (std::none_of(mask.begin(), mask.end(), [](std::uint8_t v) { return v != 0; })) {
    fail(ErrorCode::kInvalidArgument, "explicit mask selects no pixel");
  }
  for (auto& v : mask) v = v ? 1 : 0;
  FovMask m;
  m.width_ = width;
  m.height_ = height;
  m.explicit_ = std::move(mask);
  return m;
}

bool FovMask::contains_pixel(int x, int y) const noexcept {
  if (is_disk()) {
    const double dx = x + 0.5 - disk_.cx;
    const double dy = y + 0.5 - disk_.cy;
    return dx * dx + dy * dy <= disk_.radius * disk_.radius;
  }
  if (x < 0 || y < 0 || x >= width_ || y >= height_) return false;
  return explicit_[static_cast<std::size_t>(y) * width_ + x] != 0;
}

double FovMask::area() const noexcept {
  if (is_disk()) return std::numbers::pi * disk_.radius * disk_.radius;
  return static_cast<double>(std::count(explicit_.begin(), explicit_.end(), std::uint8_t{1}));
}

Origin FovMask::grid_anchor() const noexcept {
  if (is_disk()) {
    return {static_cast<int>(std::floor(disk_.cx - disk_.radius)),
            static_cast<int>(std::floor(disk_.cy - disk_.radius))};
  }
  Origin a{width_, height_};
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      if (explicit_[static_cast<std::size_t>(y) * width_ + x]) {
        a.x = std::min(a.x, x);
        a.y = std::min(a.y, y);
      }
    }
  }
  return a;
}

void FovMask::check_compatible(const GrayImage& image) const {
  if (is_disk()) {
    // Nearest point of the image rectangle to the centre.
    const double nx = std::clamp(disk_.cx, 0.0, static_cast<double>(image.width()));
    const double ny = std::clamp(disk_.cy, 0.0, static_cast<double>(image.height()));
    const double dx = nx - disk_.cx, dy = ny - disk_.cy;
    if (image.empty() || dx * dx + dy * dy > disk_.radius * disk_.radius) {
      fail(ErrorCode::kInvalidArgument, "field-of-view disk does not intersect the image");
    }
    return;
  }
  if (width_ != image.width() || height_ != image.height()) {
    fail(ErrorCode::kSizeMismatch, "explicit mask is " + std::to_string(width_) + "x" + std::to_string(height_) +
                                       ", image is " + std::to_string(image.width()) + "x" +
                                       std::to_string(image.height()));
  }
}

FovMask detect_fov(const GrayImage& image, int patch_size) {
  const int w = image.width(), h = image.height();
  std::size_t foreground = 0;
  double sx = 0.0, sy = 0.0;
  for (int y = 0; y < h; ++y) {
    auto row = image.row(y);
    for (int x = 0; x < w; ++x) {
      if (row[x] > kBackgroundThreshold) {
        ++foreground;
        sx += x + 0.5;
        sy += y + 0.5;
      }
    }
  }
  if (foreground == 0) fail(ErrorCode::kDegenerate, "no usable field of view");

  const double min_radius = patch_size / std::numbers::sqrt2;
  if (foreground == image.size()) {
    const double r = std::min(w, h) / 2.0;
    if (r < min_radius) fail(ErrorCode::kDegenerate, "no usable field of view");
    return FovMask::disk(w / 2.0, h / 2.0, r);
  }

  const double cx = sx / foreground, cy = sy / foreground;
  struct Px {
    double d2;
    bool fg;
  };
  std::vector<Px> px;
  px.reserve(image.size());
  for (int y = 0; y < h; ++y) {
    auto row = image.row(y);
    for (int x = 0; x < w; ++x) {
      const double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
      px.push_back({dx * dx + dy * dy, row[x] > kBackgroundThreshold});
    }
  }
  std::sort(px.begin(), px.end(), [](const Px& a, const Px& b) { return a.d2 > b.d2; });

  // Walk inwards one distance shell at a time; the disk boundary sits on the
  // current shell and everything already visited is outside.
  double radius2 = px.front().d2;
  std::size_t outside = 0, outside_fg = 0;
  std::size_t i = 0;
  while (i < px.size()) {
    std::size_t j = i;
    std::size_t shell_fg = 0;
    while (j < px.size() && px[j].d2 == px[i].d2) shell_fg += px[j++].fg;
    const std::size_t next_out = outside + (j - i);
    const std::size_t next_fg = outside_fg + shell_fg;
    if (j == px.size()) break;
    if (static_cast<double>(next_out - next_fg) < kBackgroundFraction * static_cast<double>(next_out)) break;
    outside = next_out;
    outside_fg = next_fg;
    radius2 = px[j].d2;
    i = j;
  }
  const double radius = std::sqrt(radius2);
  if (radius < min_radius) fail(ErrorCode::kDegenerate, "no usable field of view");
  return FovMask::disk(cx, cy, radius);
}

bool square_inside_disk(const Disk& disk, int x, int y, int size) noexcept {
  const double r2 = disk.radius * disk.radius;
  for (int cy : {y, y + size}) {
    for (int cx : {x, x + size}) {
      const double dx = cx - disk.cx, dy = cy - disk.cy;
      if (dx * dx + dy * dy > r2) return false;
    }
  }
  return true;
}

namespace {

// Integral image over "pixel is outside the mask" for O(1) block tests.
std::vector<std::int64_t> outside_integral(const FovMask& mask) {
  const int w = mask.mask_width(), h = mask.mask_height();
  auto bits = mask.mask_bits();
  std::vector<std::int64_t> s(static_cast<std::size_t>(w + 1) * (h + 1), 0);
  for (int y = 0; y < h; ++y) {
    std::int64_t run = 0;
    for (int x = 0; x < w; ++x) {
      run += bits[static_cast<std::size_t>(y) * w + x] ? 0 : 1;
      s[static_cast<std::size_t>(y + 1) * (w + 1) + x + 1] = s[static_cast<std::size_t>(y) * (w + 1) + x + 1] + run;
    }
  }
  return s;
}

}  // namespace

PatchSet extract_patches(const GrayImage& image, const FovMask& mask, int patch_size, int stride,
                         std::string image_id) {
  if (patch_size < 8) fail(ErrorCode::kInvalidArgument, "patch_size must be at least 8");
  if (stride <= 0) stride = patch_size;
  mask.check_compatible(image);

  PatchSet set;
  set.image_id = std::move(image_id);
  set.patch_size = patch_size;
  set.stride = stride;

  const int w = image.width(), h = image.height();
  const Origin anchor = mask.grid_anchor();
  // First grid index whose origin is >= 0.
  auto first_index = [&](int a) { return a >= 0 ? 0 : (-a + stride - 1) / stride; };

  std::vector<std::int64_t> integral;
  if (!mask.is_disk()) integral = outside_integral(mask);
  auto block_inside = [&](int x, int y) {
    if (mask.is_disk()) return square_inside_disk(mask.disk_geometry(), x, y, patch_size);
    const std::size_t W = static_cast<std::size_t>(w) + 1;
    const std::int64_t outside = integral[(y + patch_size) * W + x + patch_size] - integral[y * W + x + patch_size] -
                                 integral[(y + patch_size) * W + x] + integral[y * W + x];
    return outside == 0;
  };

  for (int iy = first_index(anchor.y);; ++iy) {
    const int y = anchor.y + iy * stride;
    if (y + patch_size > h) break;
    for (int ix = first_index(anchor.x);; ++ix) {
      const int x = anchor.x + ix * stride;
      if (x + patch_size > w) break;
      if (block_inside(x, y)) set.origins.push_back({x, y});
    }
  }

  const std::size_t n = static_cast<std::size_t>(patch_size) * patch_size;
  set.pixels.resize(set.origins.size() * n);
  for (std::size_t k = 0; k < set.origins.size(); ++k) {
    const auto [x, y] = set.origins[k];
    for (int r = 0; r < patch_size; ++r) {
      auto src = image.row(y + r).subspan(x, patch_size);
      std::copy(src.begin(), src.end(), set.pixels.begin() + k * n + static_cast<std::size_t>(r) * patch_size);
    }
  }
  if (set.empty()) {
    log::warn("no " + std::to_string(patch_size) + "px patch fits inside the field of view" +
              (set.image_id.empty() ? std::string() : " of '" + set.image_id + "'"));
  }
  return set;
}

std::size_t patch_count_upper_bound(const FovMask& mask, int patch_size, int stride) {
  if (stride <= 0) stride = patch_size;
  const double cell = std::min(stride, patch_size);
  return static_cast<std::size_t>(std::floor(mask.area() / (cell * cell)));
}

}  // namespace cle::fov
