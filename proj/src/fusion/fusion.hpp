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

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "classifier/classifier.hpp"
#include "common/image.hpp"
#include "fov/fov.hpp"
#include "ingest/manifest.hpp"

namespace cle::fusion {

using classifier::ProbPair;

enum class FusionMethod { kMean, kMedian, kMaxCarcinoma, kGeometricMean };

std::string_view to_string(FusionMethod method) noexcept;
std::optional<FusionMethod> parse_fusion_method(std::string_view text) noexcept;

inline constexpr double kDefaultThreshold = 0.5;

/// Combines per-patch probability pairs into one image-level pair.
///
/// mean / median / geometric-mean operate on the carcinoma probabilities
/// (geometric-mean normalises the per-class geometric means); max-carcinoma
/// takes the most suspicious patch. Inputs are summed in sorted order, so the
/// result is exactly invariant under permutation. Throws kInvalidArgument
/// ("no patches to fuse") on empty input or on a malformed pair.
ProbPair fuse(std::span<const ProbPair> patch_probs, FusionMethod method = FusionMethod::kMean);

// Ties go to carcinoma.
inline ingest::Label decide(double carcinoma_probability, double threshold = kDefaultThreshold) noexcept {
  return carcinoma_probability >= threshold ? ingest::Label::kCarcinoma : ingest::Label::kHealthy;
}

struct ImagePrediction {
  std::string image_id;
  std::vector<ProbPair> patch_probabilities;
  ProbPair fused;
  ingest::Label decision = ingest::Label::kHealthy;
  FusionMethod fusion_method = FusionMethod::kMean;
  double threshold = kDefaultThreshold;
};

/// extract_patches -> predict -> fuse. Throws kDegenerate ("image has no
/// usable patches") when the mask admits no patch.
ImagePrediction classify_image(const GrayImage& image, const fov::FovMask& mask,
                               const classifier::PatchClassifier& classifier,
                               FusionMethod method = FusionMethod::kMean, double threshold = kDefaultThreshold,
                               std::string image_id = {});

}  // namespace cle::fusion
