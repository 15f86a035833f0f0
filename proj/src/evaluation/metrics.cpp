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

#include "evaluation/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "common/error.hpp"

namespace cle::eval {
namespace {

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

struct Step {
  double threshold;
  std::size_t tp;
  std::size_t fp;
};

// Cumulative (tp, fp) after admitting each distinct score, highest first.
std::vector<Step> cumulative_steps(std::span<const ScoredPrediction> predictions) {
  std::vector<std::size_t> order(predictions.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return predictions[a].score > predictions[b].score; });
  std::vector<Step> steps;
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = predictions[order[i]].score;
    while (i < order.size() && predictions[order[i]].score == s) {
      if (predictions[order[i]].label == Label::kCarcinoma) ++tp; else ++fp;
      ++i;
    }
    steps.push_back({s, tp, fp});
  }
  return steps;
}

}  // namespace

ConfusionCounts confusion(std::span<const ScoredPrediction> predictions) {
  ConfusionCounts c;
  for (const auto& p : predictions) {
    const bool pos = p.label == Label::kCarcinoma;
    const bool said_pos = p.decision == Label::kCarcinoma;
    if (pos && said_pos) ++c.tp;
    else if (!pos && said_pos) ++c.fp;
    else if (!pos) ++c.tn;
    else ++c.fn;
  }
  return c;
}

std::vector<RocPoint> roc_curve(std::span<const ScoredPrediction> predictions) {
  for (const auto& p : predictions) {
    if (std::isnan(p.score)) fail(ErrorCode::kInvalidArgument, "NaN score");
  }
  const auto steps = cumulative_steps(predictions);
  if (steps.empty()) return {};
  const std::size_t pos = steps.back().tp, neg = steps.back().fp;
  if (pos == 0 || neg == 0) return {};
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<RocPoint> roc;
  roc.push_back({0.0, 0.0, inf});
  for (const auto& s : steps) {
    roc.push_back({static_cast<double>(s.fp) / neg, static_cast<double>(s.tp) / pos, s.threshold});
  }
  roc.push_back({1.0, 1.0, -inf});
  return roc;
}

std::optional<double> roc_auc(std::span<const ScoredPrediction> predictions) {
  const auto steps = cumulative_steps(predictions);
  if (steps.empty()) return std::nullopt;
  const std::size_t pos = steps.back().tp, neg = steps.back().fp;
  if (pos == 0 || neg == 0) return std::nullopt;
  // Twice the trapezoid area in count units, kept integral until the end.
  unsigned long long twice_area = 0;
  std::size_t prev_tp = 0, prev_fp = 0;
  for (const auto& s : steps) {
    twice_area += static_cast<unsigned long long>(s.fp - prev_fp) * (s.tp + prev_tp);
    prev_tp = s.tp;
    prev_fp = s.fp;
  }
  return static_cast<double>(twice_area) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
}

std::map<std::string, PatientAccuracy> per_patient_accuracy(std::span<const ScoredPrediction> predictions) {
  std::map<std::string, PatientAccuracy> out;
  for (const auto& p : predictions) {
    auto& acc = out[p.patient_id];
    ++acc.total;
    acc.correct += p.decision == p.label;
  }
  return out;
}

MetricsReport compute_metrics(std::span<const ScoredPrediction> predictions, std::string condition_name) {
  if (predictions.empty()) fail(ErrorCode::kInvalidArgument, "no predictions to evaluate");
  MetricsReport r;
  r.condition_name = std::move(condition_name);
  r.n_images = predictions.size();
  r.counts = confusion(predictions);
  r.accuracy = ratio(r.counts.tp + r.counts.tn, r.n_images);
  r.precision = ratio(r.counts.tp, r.counts.tp + r.counts.fp);
  r.recall = ratio(r.counts.tp, r.counts.tp + r.counts.fn);
  r.roc = roc_curve(predictions);
  r.auc = roc_auc(predictions);
  r.per_patient = per_patient_accuracy(predictions);
  return r;
}

double weighted_patient_accuracy(const std::map<std::string, PatientAccuracy>& per_patient) {
  std::size_t correct = 0, total = 0;
  for (const auto& [_, a] : per_patient) {
    correct += a.correct;
    total += a.total;
  }
  return static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace cle::eval
