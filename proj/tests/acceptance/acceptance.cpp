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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails. Artifacts of the end-to-end run are kept
// under ./acceptance_out for inspection.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "common/format.hpp"
#include "common/log.hpp"
#include "evaluation/folds.hpp"
#include "evaluation/metrics.hpp"
#include "experiment/experiment.hpp"
#include "fov/fov.hpp"
#include "oracles.hpp"
#include "quality/quality.hpp"
#include "synth/synth.hpp"

namespace {

namespace fs = std::filesystem;
using namespace cle;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(const std::string& name, const Outcome& o) {
  std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  if (!o.pass) ++failures;
}

void run_check(const std::string& name, const std::function<Outcome()>& check) {
  try {
    report(name, check());
  } catch (const std::exception& e) {
    report(name, {false, std::string("exception: ") + e.what()});
  }
}

std::string fmt(double v, int digits = 4) { return format_fixed(v, digits); }

Outcome geometry_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20260101);
  std::uniform_int_distribution<int> size_d(64, 640), patch_d(8, 100), stride_d(4, 120);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int mismatches = 0;
  std::size_t patches = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int w = size_d(rng), h = size_d(rng);
    const double r = 10.0 + unit(rng) * 0.6 * std::max(w, h);
    const fov::Disk d{unit(rng) * w, unit(rng) * h, r};
    const int patch = patch_d(rng), stride = stride_d(rng);
    const GrayImage img(w, h, 1);
    const auto set = fov::extract_patches(img, fov::FovMask::disk(d.cx, d.cy, d.radius), patch, stride);
    const auto expect = testing::oracle_origins(w, h, d, patch, stride);
    const std::set<fov::Origin> got(set.origins.begin(), set.origins.end());
    const std::set<fov::Origin> want(expect.begin(), expect.end());
    if (got != want || got.size() != set.origins.size()) ++mismatches;
    patches += set.size();
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && secs < 30.0, "50 configurations, " + std::to_string(mismatches) + " mismatches, " +
                                              std::to_string(patches) + " origins, " + fmt(secs, 2) + " s"};
}

Outcome auc_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(777);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto preds = testing::random_scored(rng, 2 + rng() % 499);
    const auto auc = eval::roc_auc(preds);
    if (!auc) return {false, "AUC undefined on a two-class set"};
    worst = std::max(worst, std::abs(*auc - testing::pair_auc(preds)));
  }
  const double secs = seconds_since(t0);
  std::ostringstream s;
  s << "100 sets, max |trapezoid - pair count| = " << worst << ", " << fmt(secs, 2) << " s";
  return {worst <= 1e-9 && secs < 10.0, s.str()};
}

// `extra` supplies per-patient breakdowns from real runs to check as well.
Outcome metric_identities(const std::vector<eval::MetricsReport>& extra) {
  using eval::ScoredPrediction;
  const auto H = ingest::Label::kHealthy, C = ingest::Label::kCarcinoma;
  // Hand-counted: tp 3, fp 1, tn 4, fn 2; accuracy 7/10, precision 3/4, recall 3/5.
  const std::vector<ScoredPrediction> fixture = {
      {C, 0.9, C, "A"}, {C, 0.8, C, "A"}, {C, 0.7, C, "B"}, {C, 0.4, H, "B"}, {C, 0.2, H, "C"},
      {H, 0.6, C, "C"}, {H, 0.3, H, "C"}, {H, 0.2, H, "D"}, {H, 0.1, H, "D"}, {H, 0.0, H, "D"}};
  const auto r = eval::compute_metrics(fixture);
  bool ok = r.counts == eval::ConfusionCounts{3, 1, 4, 2} && *r.accuracy == 0.7 && *r.precision == 0.75 &&
            *r.recall == 0.6;
  // Degenerate fixture: no predicted positives, no actual positives.
  const std::vector<ScoredPrediction> negatives = {{H, 0.1, H, "A"}, {H, 0.2, H, "B"}};
  const auto n = eval::compute_metrics(negatives);
  ok = ok && n.counts == eval::ConfusionCounts{0, 0, 2, 0} && *n.accuracy == 1.0 && !n.precision && !n.recall;

  std::mt19937_64 rng(4242);
  int runs = 0, mismatched = 0;
  for (int trial = 0; trial < 200; ++trial, ++runs) {
    const auto rep = eval::compute_metrics(testing::random_scored(rng, 2 + rng() % 400));
    if (eval::weighted_patient_accuracy(rep.per_patient) != *rep.accuracy) ++mismatched;
  }
  for (const auto& rep : extra) {
    ++runs;
    if (!rep.accuracy || eval::weighted_patient_accuracy(rep.per_patient) != *rep.accuracy) ++mismatched;
  }
  return {ok && mismatched == 0, std::string("fixtures ") + (ok ? "match" : "DIFFER") +
                                     "; weighted per-patient accuracy == global accuracy on " +
                                     std::to_string(runs - mismatched) + "/" + std::to_string(runs) + " runs"};
}

Outcome fold_hygiene(const std::vector<experiment::ConditionResult>& suite) {
  std::ostringstream s;
  bool ok = true;
  for (std::size_t n : {12u, 17u}) {
    std::vector<std::string> patients;
    for (std::size_t i = 0; i < n; ++i) patients.push_back("P" + std::to_string(i));
    const auto plan = eval::plan_lopo(patients);
    bool shape = plan.folds.size() == n;
    for (const auto& f : plan.folds) {
      std::vector<std::string> shared;
      std::set_intersection(f.train_patients.begin(), f.train_patients.end(), f.test_patients.begin(),
                            f.test_patients.end(), std::back_inserter(shared));
      shape = shape && f.train_patients.size() == n - 1 && f.test_patients.size() == 1 && shared.empty();
    }
    ok = ok && shape;
    s << "LOPO(" << n << "): " << plan.folds.size() << " folds x train " << plan.folds[0].train_patients.size()
      << (shape ? "" : " WRONG") << "; ";
  }
  // The folds the suite actually trained on.
  std::size_t folds = 0, leaks = 0;
  for (const auto& c : suite) {
    for (const auto& f : c.folds) {
      ++folds;
      const std::set<std::string> train(f.train_patients.begin(), f.train_patients.end());
      for (const auto& p : f.test_patients) leaks += train.contains(p);
    }
    if (c.condition.name == "OC" && (c.folds.size() != 12 || c.folds[0].train_patients.size() != 11)) ok = false;
    if (c.condition.name == "OC+VC" && (c.folds.size() != 17 || c.folds[0].train_patients.size() != 16)) ok = false;
  }
  ok = ok && leaks == 0 && folds > 0;
  s << "suite: " << folds << " folds, " << leaks << " leaked patients";
  return {ok, s.str()};
}

Outcome fusion_properties() {
  const auto perm = testing::fusion_permutation_invariance(4000, 1);
  const auto fixed = testing::fusion_constant_fixed_point(4000, 2);
  const auto mono = testing::fusion_monotonicity(2000, 3);
  const bool ok = perm.ok() && fixed.ok() && mono.ok() && perm.cases >= 1000 && fixed.cases >= 1000 &&
                  mono.cases >= 1000;
  std::ostringstream s;
  s << "permutation " << perm.cases - perm.failures << "/" << perm.cases << ", fixed point "
    << fixed.cases - fixed.failures << "/" << fixed.cases << ", monotonicity " << mono.cases - mono.failures << "/"
    << mono.cases << " (dyadic inputs, exact comparison)";
  return {ok, s.str()};
}

Outcome gradient_check() {
  using nn::LayerSpec;
  nn::Network<double> net({1, 10, 10}, {LayerSpec::conv(3, 3), LayerSpec::relu(), LayerSpec::max_pool(2),
                                        LayerSpec::conv(4, 2), LayerSpec::relu(), LayerSpec::global_avg_pool(),
                                        LayerSpec::dense(5), LayerSpec::relu(), LayerSpec::dense(2)});
  std::mt19937_64 rng(31337);
  std::normal_distribution<double> param(0.0, 0.5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (int point = 0; point < 20; ++point) {
    for (auto& p : net.params()) p = param(rng);
    std::vector<double> input(100);
    for (auto& v : input) v = unit(rng);
    worst = std::max(worst, testing::gradient_check(net, input, static_cast<int>(rng() % 2), 0.5 + unit(rng)));
  }
  std::ostringstream s;
  s << "20 points, " << net.param_count() << " parameters, max relative error " << worst;
  return {worst <= 1e-4, s.str()};
}

Outcome quality_analytics() {
  // Histogram normalisation on random medians.
  std::mt19937_64 rng(99);
  std::vector<ingest::ImageRecord> recs;
  std::vector<quality::ImageMedian> medians;
  for (int i = 0; i < 500; ++i) {
    const std::string id = "img" + std::to_string(i), site = "s" + std::to_string(rng() % 6);
    const auto label = rng() % 2 ? ingest::Label::kCarcinoma : ingest::Label::kHealthy;
    recs.push_back({id, "/x/" + id + ".png", "OC-" + id, "OC-" + id + "-s", "OC", site, label});
    medians.push_back({id, "OC", site, label, static_cast<std::uint8_t>(rng() % 256)});
  }
  const ingest::Manifest synthetic(recs);
  double worst_sum = 0.0;
  for (int bins : {1, 10, 32, 64, 256}) {
    for (const auto& h : quality::grouped_histogram(medians, synthetic, quality::GroupBy::kSite, bins)) {
      worst_sum = std::max(worst_sum, std::abs(std::accumulate(h.weights.begin(), h.weights.end(), 0.0) - 1.0));
    }
  }

  // Median against a sort oracle.
  int median_mismatch = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int w = 1 + static_cast<int>(rng() % 48), h = 1 + static_cast<int>(rng() % 48);
    std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h), bits(px.size());
    const int range = 1 + static_cast<int>(rng() % 256);
    for (auto& v : px) v = static_cast<std::uint8_t>(rng() % range);
    for (auto& b : bits) b = rng() % 3 != 0;
    bits[rng() % bits.size()] = 1;
    std::vector<std::uint8_t> selected;
    for (std::size_t i = 0; i < px.size(); ++i)
      if (bits[i]) selected.push_back(px[i]);
    std::sort(selected.begin(), selected.end());
    const GrayImage img(w, h, px);
    if (quality::median_pixel(img, fov::FovMask::explicit_mask(w, h, bits)) != selected[(selected.size() - 1) / 2]) {
      ++median_mismatch;
    }
  }

  // Site-brightness corpus: palate and lip respond weakly.
  const fs::path dir = fs::absolute("acceptance_out/quality_corpus");
  auto cfg = synth::preset("reference");
  cfg.seed = 7;
  const auto corpus = synth::generate(cfg, dir, true);
  const auto med = quality::image_medians(corpus.manifest);
  const auto hists = quality::grouped_histogram(med, corpus.manifest, quality::GroupBy::kSite);
  quality::write_quality({med, hists, quality::kDefaultBins}, quality::GroupBy::kSite, "acceptance_out/quality");
  // Low bins: the lowest third of the value range.
  const int low_bins = quality::bin_index(255 / 3, quality::kDefaultBins);
  std::ostringstream s;
  bool concentrated = hists.size() == 4;
  for (const auto& h : hists) {
    const double low = std::accumulate(h.weights.begin(), h.weights.begin() + low_bins, 0.0);
    const bool weak = h.group == "palate" || h.group == "lip";
    concentrated = concentrated && (weak ? low >= 0.9 : low <= 0.1);
    s << h.group << " " << fmt(low, 2) << ", ";
  }
  const bool ok = worst_sum <= 1e-9 && median_mismatch == 0 && concentrated;
  std::ostringstream d;
  d << "max |sum - 1| = " << worst_sum << "; median mismatches " << median_mismatch
    << "/1000; mass below value " << 255 * low_bins / quality::kDefaultBins << ": " << s.str()
    << (concentrated ? "weak sites concentrated low" : "NOT concentrated");
  return {ok, d.str()};
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

int main() {
  log::set_min_level(log::Level::kWarning);
  fs::create_directories("acceptance_out");

  run_check("geometry-oracle", geometry_oracle);
  run_check("auc-oracle", auc_oracle);
  run_check("fusion-properties", fusion_properties);
  run_check("gradient-check", gradient_check);
  run_check("quality-analytics", quality_analytics);

  // End-to-end: reference-shaped separable corpus, five standard conditions,
  // default classifier at 10 epochs. Run twice for the determinism check.
  experiment::SuiteResult first, second;
  double first_secs = 0.0, second_secs = 0.0;
  std::string e2e_error;
  try {
    auto cfg = synth::preset("separable");
    cfg.seed = 2026;
    const auto corpus = synth::generate(cfg, fs::absolute("acceptance_out/e2e_corpus"), true);
    experiment::Experiment e;
    classifier::ClassifierConfig clf;
    clf.epochs = 10;
    for (const auto& name : experiment::preset_condition_names()) {
      e.conditions.push_back(experiment::preset_condition(name, clf));
    }
    auto t0 = Clock::now();
    first = experiment::run_suite(e, corpus.manifest, fs::absolute("acceptance_out/e2e_run1"));
    first_secs = seconds_since(t0);
    t0 = Clock::now();
    second = experiment::run_suite(e, corpus.manifest, fs::absolute("acceptance_out/e2e_run2"));
    second_secs = seconds_since(t0);
  } catch (const std::exception& ex) {
    e2e_error = ex.what();
  }

  run_check("end-to-end", [&]() -> Outcome {
    if (!e2e_error.empty()) return {false, "suite did not run: " + e2e_error};
    std::ostringstream s;
    bool ok = first_secs < 20.0 * 60.0;
    s << "suite " << fmt(first_secs, 0) << " s (limit 1200 s); ";
    std::map<std::string, double> auc;
    for (const auto& c : first.conditions) {
      if (!c.ok) {
        ok = false;
        s << c.condition.name << " FAILED (" << c.error << "); ";
        continue;
      }
      const double acc = c.report.accuracy.value_or(0.0), a = c.report.auc.value_or(0.0);
      auc[c.condition.name] = a;
      s << c.condition.name << " acc " << fmt(acc, 3) << " auc " << fmt(a, 3) << "; ";
      if (c.condition.scheme == eval::Scheme::kLopo && (acc < 0.90 || a < 0.95)) ok = false;
    }
    const bool combined = auc.contains("OC+VC") && auc.contains("OC") && auc.contains("VC") &&
                          auc["OC+VC"] >= std::min(auc["OC"], auc["VC"]);
    ok = ok && combined;
    s << "OC+VC auc " << (combined ? ">=" : "<") << " min(OC, VC)";
    return {ok, s.str()};
  });

  run_check("determinism", [&]() -> Outcome {
    if (!e2e_error.empty()) return {false, "suite did not run: " + e2e_error};
    const auto a = read_file("acceptance_out/e2e_run1/results.csv");
    const auto b = read_file("acceptance_out/e2e_run2/results.csv");
    const auto ja = read_file("acceptance_out/e2e_run1/results.json");
    const auto jb = read_file("acceptance_out/e2e_run2/results.json");
    const bool ok = !a.empty() && a == b && ja == jb;
    return {ok, std::string("results.csv ") + (a == b ? "identical" : "DIFFERS") + ", results.json " +
                    (ja == jb ? "identical" : "DIFFERS") + " across two runs (second run " +
                    fmt(second_secs, 0) + " s)"};
  });

  std::vector<eval::MetricsReport> reports;
  for (const auto& c : first.conditions)
    if (c.ok) reports.push_back(c.report);
  run_check("metric-identities", [&] { return metric_identities(reports); });
  run_check("fold-hygiene", [&] { return fold_hygiene(first.conditions); });

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criterion/criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
