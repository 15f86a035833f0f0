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

#include <cmath>
#include <fstream>

#include "classifier/classifier.hpp"
#include "common/error.hpp"
#include "fusion/fusion.hpp"
#include "fusion/inference.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace cle::fusion {
namespace {

using ingest::Label;

TEST(Fuse, PermutationInvariance) {
  const auto t = testing::fusion_permutation_invariance(2000, 1);
  EXPECT_GE(t.cases, 1000);
  EXPECT_EQ(t.failures, 0);
}

TEST(Fuse, ConstantInputIsFixedPoint) {
  const auto t = testing::fusion_constant_fixed_point(2000, 2);
  EXPECT_GE(t.cases, 1000);
  EXPECT_EQ(t.failures, 0);
}

TEST(Fuse, MeanAndMaxAreMonotone) {
  const auto t = testing::fusion_monotonicity(1000, 3);
  EXPECT_GE(t.cases, 1000);
  EXPECT_EQ(t.failures, 0);
}

TEST(Fuse, KnownValues) {
  const std::vector<ProbPair> p = {{0.75, 0.25}, {0.5, 0.5}, {0.0, 1.0}, {1.0, 0.0}};
  EXPECT_EQ(fuse(p, FusionMethod::kMean).carcinoma, 0.4375);
  EXPECT_EQ(fuse(p, FusionMethod::kMedian).carcinoma, 0.375);
  EXPECT_EQ(fuse(p, FusionMethod::kMaxCarcinoma).carcinoma, 1.0);
  const std::vector<ProbPair> q = {{0.8, 0.2}, {0.2, 0.8}};
  EXPECT_NEAR(fuse(q, FusionMethod::kGeometricMean).carcinoma, 0.5, 1e-15);
  const auto r = fuse(p, FusionMethod::kMean);
  EXPECT_EQ(r.healthy + r.carcinoma, 1.0);
}

TEST(Fuse, RejectsEmptyAndMalformed) {
  try {
    fuse({});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
    EXPECT_STREQ(e.what(), "no patches to fuse");
  }
  const std::vector<ProbPair> bad = {{0.5, 0.6}};
  EXPECT_THROW(fuse(bad), Error);
  const std::vector<ProbPair> nan = {{NAN, NAN}};
  EXPECT_THROW(fuse(nan), Error);
}

TEST(Decide, TiesGoToCarcinoma) {
  EXPECT_EQ(decide(0.5), Label::kCarcinoma);
  EXPECT_EQ(decide(0.4999), Label::kHealthy);
  EXPECT_EQ(decide(0.3, 0.3), Label::kCarcinoma);
}

TEST(FusionMethodNames, RoundTrip) {
  for (auto m : testing::kAllFusionMethods) EXPECT_EQ(parse_fusion_method(to_string(m)), m);
  EXPECT_FALSE(parse_fusion_method("vote"));
}

std::unique_ptr<classifier::PatchClassifier> brightness_classifier() {
  classifier::ClassifierConfig cfg;
  cfg.kind = classifier::ClassifierKind::kMeanIntensity;
  cfg.patch_size = 16;
  classifier::LabeledPatches set;
  set.patch_size = 16;
  set.append(std::vector<std::uint8_t>(256, 50), Label::kHealthy);
  set.append(std::vector<std::uint8_t>(256, 200), Label::kCarcinoma);
  return classifier::train(cfg, set);
}

TEST(ClassifyImage, FusesPatchScores) {
  const auto clf = brightness_classifier();
  const auto img = testing::disk_image(100, 100, 50, 50, 45, 200);
  const auto pred = classify_image(img, fov::FovMask::disk(50, 50, 45), *clf, FusionMethod::kMean, 0.5, "a");
  EXPECT_EQ(pred.image_id, "a");
  EXPECT_FALSE(pred.patch_probabilities.empty());
  EXPECT_EQ(pred.decision, Label::kCarcinoma);
  EXPECT_EQ(pred.fused, fuse(pred.patch_probabilities));
  try {
    classify_image(img, fov::FovMask::disk(50, 50, 5), *clf);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerate);
  }
}

TEST(PredictManifest, ExcludesImagesWithoutFieldOfView) {
  testing::TempDir dir;
  write_png(dir / "bright.png", testing::disk_image(100, 100, 50, 50, 45, 200));
  write_png(dir / "dark.png", testing::disk_image(100, 100, 50, 50, 45, 40));
  write_png(dir / "blank.png", GrayImage(100, 100, 0));
  ingest::Manifest m({{"bright", dir / "bright.png", "OC-p1", "OC-p1-s1", "OC", "lip", Label::kCarcinoma},
                      {"blank", dir / "blank.png", "OC-p1", "OC-p1-s1", "OC", "lip", Label::kCarcinoma},
                      {"dark", dir / "dark.png", "OC-p2", "OC-p2-s1", "OC", "lip", Label::kHealthy}});
  testing::LogCapture logs;
  const auto res = predict_manifest(*brightness_classifier(), m);
  ASSERT_EQ(res.rows.size(), 2u);
  ASSERT_EQ(res.excluded.size(), 1u);
  EXPECT_EQ(res.excluded[0].image_id, "blank");
  EXPECT_TRUE(logs.contains("blank"));
  EXPECT_EQ(res.rows[0].image_id, "bright");
  EXPECT_EQ(res.rows[0].decision, Label::kCarcinoma);
  EXPECT_EQ(res.rows[1].decision, Label::kHealthy);
  EXPECT_GT(res.rows[0].n_patches, 0u);

  write_predictions_csv(res.rows, dir / "pred.csv");
  EXPECT_EQ(read_predictions_csv(dir / "pred.csv"), res.rows);

  std::vector<Exclusion> skipped;
  const auto patches = collect_training_patches(m, 16, &skipped);
  EXPECT_EQ(skipped.size(), 1u);
  EXPECT_EQ(patches.size(), res.rows[0].n_patches + res.rows[1].n_patches);
}

TEST(PredictionsCsv, RejectsMissingColumns) {
  testing::TempDir dir;
  {
    std::ofstream out(dir / "p.csv");
    out << "image_id,label\na,healthy\n";
  }
  EXPECT_THROW(read_predictions_csv(dir / "p.csv"), Error);
}

}  // namespace
}  // namespace cle::fusion
