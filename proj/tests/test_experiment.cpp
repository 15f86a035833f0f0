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

#include <fstream>
#include <memory>
#include <set>

#include "common/error.hpp"
#include "evaluation/metrics.hpp"
#include "evaluation/report_io.hpp"
#include "experiment/experiment.hpp"
#include "synth/synth.hpp"
#include "test_util.hpp"

namespace cle::experiment {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Small brightness-coded corpus: 3 OC and 2 VC patients, two images each.
class ExperimentTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    corpus_ = new cle::testing::TempDir;
    auto c = synth::preset("brightness");
    c.image_size = 128;
    c.fov_radius = 60;
    c.seed = 5;
    c.datasets = {{"OC", 3, 2, 1, {{"ridge", 70, 5}}}, {"VC", 2, 2, 1, {{"vocal_cord", 70, 5}}}};
    manifest_ = new ingest::Manifest(synth::generate(c, corpus_->path()).manifest);
  }
  static void TearDownTestSuite() {
    delete manifest_;
    delete corpus_;
  }

  static classifier::ClassifierConfig fast() {
    classifier::ClassifierConfig c;
    c.kind = classifier::ClassifierKind::kMeanIntensity;
    c.patch_size = 32;
    return c;
  }

  static cle::testing::TempDir* corpus_;
  static ingest::Manifest* manifest_;
};

cle::testing::TempDir* ExperimentTest::corpus_ = nullptr;
ingest::Manifest* ExperimentTest::manifest_ = nullptr;

TEST_F(ExperimentTest, LopoConditionStructure) {
  cle::testing::TempDir out;
  const auto r = run_condition(preset_condition("OC", fast()), *manifest_, 9, {out.path(), 1, true});
  ASSERT_TRUE(r.ok);
  ASSERT_EQ(r.folds.size(), 3u);
  std::set<std::string> tested;
  for (const auto& f : r.folds) {
    ASSERT_EQ(f.test_patients.size(), 1u);
    EXPECT_EQ(f.train_patients.size(), 2u);
    for (const auto& p : f.train_patients) EXPECT_NE(p, f.test_patients[0]);
    tested.insert(f.test_patients[0]);
    EXPECT_EQ(f.test_images, 2u);
    EXPECT_EQ(f.train_images, 4u);
    EXPECT_TRUE(fs::exists(out.path() / f.model_path));
  }
  EXPECT_EQ(tested.size(), 3u);
  ASSERT_EQ(r.predictions.size(), 6u);
  for (const auto& row : r.predictions) EXPECT_EQ(row.dataset_id, "OC");
  EXPECT_EQ(*r.report.accuracy, 1.0);
  for (const char* name : {"folds.json", "predictions.csv", "report.json", "roc.csv", "per_patient.csv"}) {
    EXPECT_TRUE(fs::exists(out.path() / "OC" / name)) << name;
  }
  std::ifstream in(out.path() / "OC" / "report.json");
  const auto report = json::parse(in);
  EXPECT_EQ(report.at("n_folds"), 3);
  EXPECT_EQ(report.at("scheme"), "LOPO");
  EXPECT_EQ(report.at("provenance").at("seed"), 9);
}

TEST_F(ExperimentTest, CrossSiteTestsOnlyTheOtherDataset) {
  const auto r = run_condition(preset_condition("OC/VC", fast()), *manifest_, 1);
  ASSERT_EQ(r.folds.size(), 1u);
  EXPECT_EQ(r.folds[0].train_patients.size(), 3u);
  EXPECT_EQ(r.folds[0].test_patients.size(), 2u);
  ASSERT_EQ(r.predictions.size(), 4u);
  for (const auto& row : r.predictions) EXPECT_EQ(row.dataset_id, "VC");
}

TEST_F(ExperimentTest, MetricsArePooledOverFolds) {
  auto cfg = fast();
  const auto r = run_condition(preset_condition("OC+VC", cfg), *manifest_, 2);
  ASSERT_EQ(r.folds.size(), 5u);
  ASSERT_EQ(r.predictions.size(), 10u);
  const auto scored = eval::to_scored(r.predictions);
  const auto pooled = eval::compute_metrics(scored);
  EXPECT_EQ(r.report.auc, pooled.auc);
  EXPECT_EQ(r.report.accuracy, pooled.accuracy);
  // Rows come back in manifest order, not fold order.
  for (std::size_t i = 0; i < r.predictions.size(); ++i) {
    EXPECT_EQ(r.predictions[i].image_id, manifest_->records()[i].image_id);
  }
}

TEST_F(ExperimentTest, SuiteIsDeterministicAndRecordsFailures) {
  Experiment e;
  e.seed = 3;
  e.save_models = false;
  classifier::ClassifierConfig tiny;
  tiny.patch_size = 32;
  tiny.layers = {nn::LayerSpec::conv(2, 3), nn::LayerSpec::relu(), nn::LayerSpec::global_avg_pool(),
                 nn::LayerSpec::dense(2)};
  tiny.epochs = 2;
  e.conditions = {preset_condition("VC", tiny), preset_condition("OC/VC", fast())};
  auto missing = preset_condition("OC", fast());
  missing.name = "missing";
  missing.train_datasets = missing.test_datasets = {"SYNTH-none"};
  e.conditions.push_back(missing);

  cle::testing::TempDir a, b;
  cle::testing::LogCapture logs;
  const auto ra = run_suite(e, *manifest_, a.path());
  const auto rb = run_suite(e, *manifest_, b.path());
  ASSERT_EQ(ra.conditions.size(), 3u);
  EXPECT_TRUE(ra.conditions[0].ok);
  EXPECT_TRUE(ra.conditions[1].ok);
  EXPECT_FALSE(ra.conditions[2].ok);
  EXPECT_TRUE(logs.contains("missing"));
  EXPECT_EQ(results_csv(ra), results_csv(rb));
  EXPECT_EQ(ra.conditions[0].folds[0].training_log, rb.conditions[0].folds[0].training_log);
  std::ifstream ca(a.path() / "results.csv"), cb(b.path() / "results.csv");
  std::string ta((std::istreambuf_iterator<char>(ca)), {}), tb((std::istreambuf_iterator<char>(cb)), {});
  EXPECT_EQ(ta, tb);
  EXPECT_NE(ta.find("missing,SYNTH-none,SYNTH-none,LOPO,0,0"), std::string::npos) << ta;
}

TEST_F(ExperimentTest, ParallelFoldsMatchSerial) {
  const auto cond = preset_condition("OC", fast());
  const auto serial = run_condition(cond, *manifest_, 4, {{}, 1, false});
  const auto parallel = run_condition(cond, *manifest_, 4, {{}, 3, false});
  EXPECT_EQ(serial.predictions, parallel.predictions);
}

TEST(ExperimentConfig, ParsesDefaultsAndOverrides) {
  const auto def = parse_experiment(json::object());
  ASSERT_EQ(def.conditions.size(), 5u);
  EXPECT_EQ(def.conditions[2].name, "OC/VC");
  EXPECT_EQ(def.conditions[2].scheme, eval::Scheme::kFixedSplit);

  const auto e = parse_experiment(json::parse(R"({
    "seed": 8, "classifier": {"epochs": 3}, "fusion": "median",
    "conditions": ["OC", {"name": "mine", "train": ["OC"], "test": ["VC"],
                          "classifier": {"batch_size": 16}, "threshold": 0.4, "seed": 12}]})"));
  EXPECT_EQ(e.seed, 8u);
  ASSERT_EQ(e.conditions.size(), 2u);
  EXPECT_EQ(e.conditions[0].classifier.epochs, 3);
  EXPECT_EQ(e.conditions[0].fusion, fusion::FusionMethod::kMedian);
  EXPECT_EQ(e.conditions[1].classifier.epochs, 3);
  EXPECT_EQ(e.conditions[1].classifier.batch_size, 16);
  EXPECT_EQ(e.conditions[1].scheme, eval::Scheme::kFixedSplit);
  EXPECT_EQ(e.conditions[1].threshold, 0.4);
  EXPECT_EQ(condition_seed(e, e.conditions[1]), 12u);
  EXPECT_NE(condition_seed(e, e.conditions[0]), condition_seed(e, preset_condition("VC")));

  const auto empty = parse_experiment(json::parse(R"({"conditions": []})"));
  EXPECT_TRUE(empty.conditions.empty());
}

TEST(ExperimentConfig, RejectsInvalid) {
  auto bad = [](const char* text) { return [text] { parse_experiment(json::parse(text)); }; };
  EXPECT_THROW(bad(R"({"conditions": ["XY"]})")(), Error);
  EXPECT_THROW(bad(R"({"conditions": [{"name": "a", "train": ["OC"], "test": ["OC"], "scheme": "kfold"}]})")(),
               Error);
  EXPECT_THROW(bad(R"({"conditions": [{"name": "a", "train": ["OC"], "test": ["VC"], "scheme": "LOPO"}]})")(),
               Error);
  EXPECT_THROW(bad(R"({"conditions": ["OC", "OC"]})")(), Error);
  EXPECT_THROW(bad(R"({"colour": 1})")(), Error);
  EXPECT_THROW(bad(R"({"threshold": 2})")(), Error);
  EXPECT_THROW(bad(R"({"jobs": 0})")(), Error);
}

TEST(ExperimentNames, DirectoryNames) {
  EXPECT_EQ(condition_dir_name("OC/VC"), "OC_VC");
  EXPECT_EQ(condition_dir_name("OC+VC"), "OC+VC");
}

}  // namespace
}  // namespace cle::experiment
