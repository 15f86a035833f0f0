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

#include "fusion/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "common/error.hpp"

namespace cle::fusion {

std::string_view to_string(FusionMethod method) noexcept {
  switch (method) {
    case FusionMethod::kMean: return "mean";
    case FusionMethod::kMedian: return "median";
    case FusionMethod::kMaxCarcinoma: return "max-carcinoma";
    case FusionMethod::kGeometricMean: return "geometric-mean";
  }
  return "mean";
}

std::optional<FusionMethod> parse_fusion_method(std::string_view text) noexcept {
  for (auto m : {FusionMethod::kMean, FusionMethod::kMedian, FusionMethod::kMaxCarcinoma,
                 FusionMethod::kGeometricMean}) {
    if (text == to_string(m)) return m;
  }
  return std::nullopt;
}

namespace {

constexpr double kPairTolerance = 1e-6;
constexpr double kLogFloor = 1e-12;

double sorted_sum(std::vector<double>& values) {
  std::sort(values.begin(), values.end());
  return std::accumulate(values.begin(), values.end(), 0.0);
}

double geometric_mean(std::vector<double> values) {
  for (auto& v : values) v = std::log(std::max(v, kLogFloor));
  return std::exp(sorted_sum(values) / static_cast<double>(values.size()));
}

}  // namespace

ProbPair fuse(std::span<const ProbPair> patch_probs, FusionMethod method) {
  if (patch_probs.empty()) fail(ErrorCode::kInvalidArgument, "no patches to fuse");
  std::vector<double> pc;
  pc.reserve(patch_probs.size());
  for (const auto& p : patch_probs) {
    if (!(p.carcinoma >= 0.0 && p.carcinoma <= 1.0 && p.healthy >= 0.0 && p.healthy <= 1.0) ||
        std::abs(p.carcinoma + p.healthy - 1.0) > kPairTolerance) {
      fail(ErrorCode::kInvalidArgument, "invalid probability pair");
    }
    pc.push_back(p.carcinoma);
  }
  const auto [lo_it, hi_it] = std::minmax_element(pc.begin(), pc.end());
  const double lo = *lo_it, hi = *hi_it;
  if (lo == hi) return {1.0 - lo, lo};

  double c = 0.0;
  switch (method) {
    case FusionMethod::kMean:
      c = sorted_sum(pc) / static_cast<double>(pc.size());
      break;
    case FusionMethod::kMedian: {
      std::sort(pc.begin(), pc.end());
      const std::size_t n = pc.size();
      c = n % 2 ? pc[n / 2] : 0.5 * (pc[n / 2 - 1] + pc[n / 2]);
      break;
    }
    case FusionMethod::kMaxCarcinoma:
      c = hi;
      break;
    case FusionMethod::kGeometricMean: {
      std::vector<double> ph;
      ph.reserve(pc.size());
      for (double v : pc) ph.push_back(1.0 - v);
      const double gc = geometric_mean(pc), gh = geometric_mean(std::move(ph));
      c = gc / (gc + gh);
      break;
    }
  }
  // Rounding must not push the result outside the input range.
  c = std::clamp(c, lo, hi);
  return {1.0 - c, c};
}

ImagePrediction classify_image(const GrayImage& image, const fov::FovMask& mask,
                               const classifier::PatchClassifier& classifier, FusionMethod method,
                               double threshold, std::string image_id) {
  const auto patches =
      fov::extract_patches(image, mask, classifier.patch_size(), classifier.patch_size(), image_id);
  if (patches.empty()) fail(ErrorCode::kDegenerate, "image has no usable patches");
  ImagePrediction out;
  out.image_id = std::move(image_id);
  out.patch_probabilities = classifier.predict(patches);
  out.fused = fuse(out.patch_probabilities, method);
  out.decision = decide(out.fused.carcinoma, threshold);
  out.fusion_method = method;
  out.threshold = threshold;
  return out;
}

}  // namespace cle::fusion
