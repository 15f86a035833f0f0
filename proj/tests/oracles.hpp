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

// Brute-force reference implementations shared by the unit tests and the
// acceptance binary.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "classifier/network.hpp"
#include "evaluation/metrics.hpp"
#include "fov/fov.hpp"
#include "fusion/fusion.hpp"

namespace cle::testing {

// The square [x, x+s]^2 is inside the closed disk iff its farthest point from
// the centre is.
inline bool square_in_disk_oracle(const fov::Disk& d, int x, int y, int s) {
  const double fx = std::max(std::abs(x - d.cx), std::abs(x + s - d.cx));
  const double fy = std::max(std::abs(y - d.cy), std::abs(y + s - d.cy));
  return fx * fx + fy * fy <= d.radius * d.radius;
}

inline int floor_mod(int a, int m) { return ((a % m) + m) % m; }

// Scans every pixel position of the image and keeps the lattice points whose
// patch lies in the disk.
inline std::vector<fov::Origin> oracle_origins(int w, int h, const fov::Disk& d, int patch, int stride) {
  const int ax = static_cast<int>(std::floor(d.cx - d.radius));
  const int ay = static_cast<int>(std::floor(d.cy - d.radius));
  std::vector<fov::Origin> out;
  for (int y = 0; y + patch <= h; ++y) {
    if (floor_mod(y - ay, stride) != 0) continue;
    for (int x = 0; x + patch <= w; ++x) {
      if (floor_mod(x - ax, stride) != 0) continue;
      if (square_in_disk_oracle(d, x, y, patch)) out.push_back({x, y});
    }
  }
  return out;
}

// Probability that a random positive outscores a random negative, ties
// counting one half, by enumerating every pair.
inline double pair_auc(std::span<const eval::ScoredPrediction> preds) {
  double wins = 0.0;
  std::size_t pairs = 0;
  for (const auto& p : preds) {
    if (p.label != ingest::Label::kCarcinoma) continue;
    for (const auto& n : preds) {
      if (n.label != ingest::Label::kHealthy) continue;
      ++pairs;
      if (p.score > n.score) wins += 1.0;
      else if (p.score == n.score) wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

// n predictions over few distinct scores (so ties are common), both classes
// present, spread over a handful of patients.
inline std::vector<eval::ScoredPrediction> random_scored(std::mt19937_64& rng, std::size_t n) {
  const std::uint64_t levels = 2 + rng() % 50;
  std::vector<eval::ScoredPrediction> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& p = out[i];
    p.label = i == 0 ? ingest::Label::kHealthy
              : i == 1 ? ingest::Label::kCarcinoma
                       : (rng() % 3 == 0 ? ingest::Label::kCarcinoma : ingest::Label::kHealthy);
    p.score = static_cast<double>(rng() % levels) / static_cast<double>(levels - 1);
    p.decision = p.score >= 0.5 ? ingest::Label::kCarcinoma : ingest::Label::kHealthy;
    p.patient_id = "P" + std::to_string(rng() % 7);
  }
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

// Largest relative error between the analytic gradient and a central
// difference, over all parameters, for one sample at the network's current
// parameters. Entries where both are tiny are compared absolutely.
inline double gradient_check(nn::Network<double>& net, std::span<const double> input, int label, double weight,
                             double h = 1e-5) {
  auto ws = net.make_workspace();
  std::vector<double> grad(net.param_count(), 0.0);
  net.loss_and_gradient(input, label, weight, ws, grad);
  auto params = net.params();
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + h;
    const double up = net.loss(input, label, weight, ws);
    params[i] = saved - h;
    const double down = net.loss(input, label, weight, ws);
    params[i] = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double scale = std::max({std::abs(numeric), std::abs(grad[i]), 1e-6});
    worst = std::max(worst, std::abs(numeric - grad[i]) / scale);
  }
  return worst;
}

struct Tally {
  int cases = 0;
  int failures = 0;
  bool ok() const { return failures == 0; }
};

// Probabilities k/1024: sums of up to a few thousand of them are exact in
// double precision, so fused values can be compared with ==.
inline std::vector<fusion::ProbPair> dyadic_pairs(std::mt19937_64& rng, std::size_t n) {
  std::vector<fusion::ProbPair> out(n);
  for (auto& p : out) {
    const double c = static_cast<double>(rng() % 1025) / 1024.0;
    p = {1.0 - c, c};
  }
  return out;
}

inline constexpr fusion::FusionMethod kAllFusionMethods[] = {
    fusion::FusionMethod::kMean, fusion::FusionMethod::kMedian, fusion::FusionMethod::kMaxCarcinoma,
    fusion::FusionMethod::kGeometricMean};

// fuse(shuffled input) == fuse(input), bit for bit, for every method.
inline Tally fusion_permutation_invariance(int cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Tally t;
  for (int i = 0; i < cases; ++i) {
    auto probs = dyadic_pairs(rng, 1 + rng() % 40);
    const auto method = kAllFusionMethods[i % 4];
    const auto before = fusion::fuse(probs, method);
    std::shuffle(probs.begin(), probs.end(), rng);
    ++t.cases;
    if (!(fusion::fuse(probs, method) == before)) ++t.failures;
  }
  return t;
}

// n copies of p fuse to exactly p.
inline Tally fusion_constant_fixed_point(int cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Tally t;
  for (int i = 0; i < cases; ++i) {
    const auto p = dyadic_pairs(rng, 1)[0];
    const std::vector<fusion::ProbPair> probs(1 + rng() % 40, p);
    ++t.cases;
    if (!(fusion::fuse(probs, kAllFusionMethods[i % 4]) == p)) ++t.failures;
  }
  return t;
}

// Raising any patch's carcinoma probability never lowers the mean or max
// fused value.
inline Tally fusion_monotonicity(int cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Tally t;
  for (int i = 0; i < cases; ++i) {
    const auto lower = dyadic_pairs(rng, 1 + rng() % 40);
    auto upper = lower;
    for (auto& p : upper) {
      if (rng() % 2 == 0) continue;
      const double c = p.carcinoma + static_cast<double>(rng() % 1025) / 1024.0 * (1.0 - p.carcinoma);
      const double snapped = std::floor(c * 1024.0) / 1024.0;
      p = {1.0 - snapped, snapped};
    }
    for (auto method : {fusion::FusionMethod::kMean, fusion::FusionMethod::kMaxCarcinoma}) {
      ++t.cases;
      if (!(fusion::fuse(lower, method).carcinoma <= fusion::fuse(upper, method).carcinoma)) ++t.failures;
    }
  }
  return t;
}

}  // namespace cle::testing
