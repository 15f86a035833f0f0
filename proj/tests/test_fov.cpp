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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "common/error.hpp"
#include "fov/fov.hpp"
#include "fov/patch_export.hpp"
#include "ingest/manifest.hpp"
#include "common/csv.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace cle::fov {
namespace {

using testing::oracle_origins;

TEST(ExtractPatches, MatchesOracleOnRandomConfigurations) {
  std::mt19937_64 rng(12345);
  std::uniform_int_distribution<int> size_d(64, 400), patch_d(8, 96), stride_d(4, 120);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int w = size_d(rng), h = size_d(rng);
    const double r = 10.0 + unit(rng) * 0.6 * std::max(w, h);
    const Disk d{unit(rng) * w, unit(rng) * h, r};
    const int patch = patch_d(rng), stride = stride_d(rng);
    GrayImage img(w, h, 7);
    const auto set = extract_patches(img, FovMask::disk(d.cx, d.cy, d.radius), patch, stride);
    const auto expect = oracle_origins(w, h, d, patch, stride);
    EXPECT_EQ(set.origins, expect) << "trial " << trial;
    EXPECT_LE(set.size(), patch_count_upper_bound(FovMask::disk(d.cx, d.cy, d.radius), patch, stride));
  }
}

TEST(ExtractPatches, OrderIsRowMajorAndPixelsMatch) {
  GrayImage img(300, 300);
  for (int y = 0; y < 300; ++y)
    for (int x = 0; x < 300; ++x) img.at(x, y) = static_cast<std::uint8_t>((x * 3 + y * 11) & 0xff);
  const auto set = extract_patches(img, FovMask::disk(150, 150, 140), 40, 40, "img");
  ASSERT_GT(set.size(), 4u);
  EXPECT_TRUE(std::is_sorted(set.origins.begin(), set.origins.end()));
  for (std::size_t k = 0; k < set.size(); ++k) {
    const auto p = set.patch(k);
    const auto [x, y] = set.origins[k];
    EXPECT_EQ(p[0], img.at(x, y));
    EXPECT_EQ(p[39 * 40 + 39], img.at(x + 39, y + 39));
    EXPECT_EQ(p[5 * 40 + 17], img.at(x + 17, y + 5));
  }
  EXPECT_EQ(set.image_id, "img");
}

TEST(ExtractPatches, OverlappingStride) {
  GrayImage img(200, 200, 50);
  const auto tiled = extract_patches(img, FovMask::disk(100, 100, 95), 40, 40);
  const auto dense = extract_patches(img, FovMask::disk(100, 100, 95), 40, 20);
  EXPECT_GT(dense.size(), tiled.size());
  EXPECT_EQ(dense.stride, 20);
}

TEST(ExtractPatches, ExplicitMaskMatchesPixelOracle) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> coin(0, 9);
  for (int trial = 0; trial < 10; ++trial) {
    const int w = 90, h = 70;
    std::vector<std::uint8_t> bits(w * h, 1);
    // Carve random holes so the mask is not convex.
    for (int k = 0; k < 6; ++k) {
      const int hx = coin(rng) * 9, hy = coin(rng) * 7;
      for (int y = hy; y < std::min(h, hy + 3); ++y)
        for (int x = hx; x < std::min(w, hx + 3); ++x) bits[y * w + x] = 0;
    }
    bits[0] = 0;
    const auto mask = FovMask::explicit_mask(w, h, bits);
    const auto set = extract_patches(GrayImage(w, h, 1), mask, 8, 5);
    const Origin a = mask.grid_anchor();
    std::vector<Origin> expect;
    for (int y = a.y; y + 8 <= h; y += 5) {
      for (int x = a.x; x + 8 <= w; x += 5) {
        bool all = true;
        for (int yy = y; yy < y + 8 && all; ++yy)
          for (int xx = x; xx < x + 8 && all; ++xx) all = bits[yy * w + xx] != 0;
        if (all) expect.push_back({x, y});
      }
    }
    EXPECT_EQ(set.origins, expect);
  }
}

TEST(ExtractPatches, EmptyResultWarns) {
  testing::LogCapture logs;
  const auto set = extract_patches(GrayImage(100, 100, 9), FovMask::disk(50, 50, 20), 80, 0, "tiny");
  EXPECT_TRUE(set.empty());
  EXPECT_TRUE(logs.contains("tiny"));
}

TEST(ExtractPatches, ArgumentErrors) {
  GrayImage img(50, 50, 9);
  EXPECT_THROW(extract_patches(img, FovMask::disk(25, 25, 20), 4), Error);
  try {
    extract_patches(img, FovMask::explicit_mask(10, 10, std::vector<std::uint8_t>(100, 1)), 8);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSizeMismatch);
  }
  EXPECT_THROW(FovMask::disk(0, 0, 0), Error);
  EXPECT_THROW(FovMask::explicit_mask(2, 2, {0, 0, 0, 0}), Error);
}

TEST(DetectFov, SyntheticDisk) {
  const auto img = testing::disk_image(512, 512, 256, 256, 200, 128);
  const auto mask = detect_fov(img);
  ASSERT_TRUE(mask.is_disk());
  EXPECT_NEAR(mask.disk_geometry().cx, 256, 2);
  EXPECT_NEAR(mask.disk_geometry().cy, 256, 2);
  EXPECT_NEAR(mask.disk_geometry().radius, 200, 3);
}

TEST(DetectFov, OffCentreNoisyDisk) {
  auto img = testing::disk_image(400, 360, 190, 175, 150, 0);
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> val(3, 255);
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      const double dx = x + 0.5 - 190, dy = y + 0.5 - 175;
      if (dx * dx + dy * dy <= 150.0 * 150.0) img.at(x, y) = static_cast<std::uint8_t>(val(rng));
    }
  const auto d = detect_fov(img).disk_geometry();
  EXPECT_NEAR(d.cx, 190, 2);
  EXPECT_NEAR(d.cy, 175, 2);
  EXPECT_NEAR(d.radius, 150, 3);
}

TEST(DetectFov, FullForegroundIsInscribedDisk) {
  const auto d = detect_fov(GrayImage(300, 200, 90)).disk_geometry();
  EXPECT_DOUBLE_EQ(d.cx, 150);
  EXPECT_DOUBLE_EQ(d.cy, 100);
  EXPECT_DOUBLE_EQ(d.radius, 100);
}

TEST(DetectFov, DegenerateInputs) {
  try {
    detect_fov(GrayImage(100, 100, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerate);
    EXPECT_NE(std::string(e.what()).find("no usable field of view"), std::string::npos);
  }
  // A 30 px disk cannot hold an 80 px patch.
  EXPECT_THROW(detect_fov(testing::disk_image(200, 200, 100, 100, 30, 200)), Error);
  EXPECT_NO_THROW(detect_fov(testing::disk_image(200, 200, 100, 100, 30, 200), 16));
}

TEST(UpperBound, UsesSmallerOfStrideAndPatch) {
  const auto m = FovMask::disk(0, 0, 100);
  EXPECT_EQ(patch_count_upper_bound(m, 80, 0), static_cast<std::size_t>(std::floor(M_PI * 10000 / 6400)));
  EXPECT_EQ(patch_count_upper_bound(m, 80, 40), static_cast<std::size_t>(std::floor(M_PI * 10000 / 1600)));
  EXPECT_EQ(patch_count_upper_bound(m, 20, 40), static_cast<std::size_t>(std::floor(M_PI * 10000 / 400)));
}

TEST(ExportPatches, WritesTilesIndexAndSkipsDegenerate) {
  testing::TempDir dir;
  write_png(dir / "a.png", testing::disk_image(200, 200, 100, 100, 90, 100));
  write_png(dir / "b.png", GrayImage(200, 200, 0));
  ingest::Manifest m({{"a", dir / "a.png", "p1", "s1", "SYNTH-t", "lip", ingest::Label::kCarcinoma},
                      {"b", dir / "b.png", "p1", "s2", "SYNTH-t", "lip", ingest::Label::kHealthy}});
  testing::LogCapture logs;
  const auto summary = export_patches(m, 40, 40, dir / "out");
  EXPECT_EQ(summary.images, 1u);
  ASSERT_EQ(summary.skipped.size(), 1u);
  EXPECT_NE(summary.skipped[0].find("b"), std::string::npos);
  const auto rows = csv::read_file(dir / "out" / "index.csv");
  ASSERT_EQ(rows.size(), summary.patches + 1);
  EXPECT_EQ(rows[0].fields[0], "file");
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / rows[1].fields[0]));
  EXPECT_EQ(read_image(dir / "out" / rows[1].fields[0]).width(), 40);
}

}  // namespace
}  // namespace cle::fov
