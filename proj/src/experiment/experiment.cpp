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

#include "experiment/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "common/csv.hpp"
#include "common/error.hpp"
#include "common/format.hpp"
#include "common/hashing.hpp"
#include "common/image.hpp"
#include "common/log.hpp"
#include "evaluation/report_io.hpp"
#include "fov/fov.hpp"

namespace cle::experiment {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::set<std::string> as_set(const std::vector<std::string>& v) { return {v.begin(), v.end()}; }

std::optional<eval::Scheme> parse_scheme(std::string_view text) {
  if (text == "LOPO" || text == "lopo") return eval::Scheme::kLopo;
  if (text == "fixed-split") return eval::Scheme::kFixedSplit;
  return std::nullopt;
}

std::string join_ids(const std::vector<std::string>& ids, char sep) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += sep;
    out += ids[i];
  }
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

void ExperimentCondition::validate() const {
  if (name.empty()) fail(ErrorCode::kInvalidArgument, "condition needs a name");
  if (train_datasets.empty() || test_datasets.empty()) {
    fail(ErrorCode::kInvalidArgument, "condition '" + name + "' needs train and test datasets");
  }
  const bool same = as_set(train_datasets) == as_set(test_datasets);
  if (same && scheme != eval::Scheme::kLopo) {
    fail(ErrorCode::kInvalidArgument,
         "condition '" + name + "': identical train and test datasets require the LOPO scheme");
  }
  if (!same && scheme != eval::Scheme::kFixedSplit) {
    fail(ErrorCode::kInvalidArgument,
         "condition '" + name + "': different train and test datasets require the fixed-split scheme");
  }
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    fail(ErrorCode::kInvalidArgument, "condition '" + name + "': threshold must be in [0, 1]");
  }
  classifier.validate();
}

ExperimentCondition preset_condition(std::string_view name, const classifier::ClassifierConfig& classifier) {
  ExperimentCondition c;
  c.name = std::string(name);
  c.classifier = classifier;
  if (name == "OC" || name == "VC") {
    c.train_datasets = c.test_datasets = {std::string(name)};
    c.scheme = eval::Scheme::kLopo;
  } else if (name == "OC/VC") {
    c.train_datasets = {"OC"};
    c.test_datasets = {"VC"};
    c.scheme = eval::Scheme::kFixedSplit;
  } else if (name == "VC/OC") {
    c.train_datasets = {"VC"};
    c.test_datasets = {"OC"};
    c.scheme = eval::Scheme::kFixedSplit;
  } else if (name == "OC+VC") {
    c.train_datasets = c.test_datasets = {"OC", "VC"};
    c.scheme = eval::Scheme::kLopo;
  } else {
    fail(ErrorCode::kInvalidArgument, "unknown preset condition '" + std::string(name) + "'");
  }
  return c;
}

std::vector<std::string> preset_condition_names() { return {"OC", "VC", "OC/VC", "VC/OC", "OC+VC"}; }

json to_json(const ExperimentCondition& c) {
  json j = {{"name", c.name},
            {"train", c.train_datasets},
            {"test", c.test_datasets},
            {"scheme", eval::to_string(c.scheme)},
            {"classifier", c.classifier},
            {"fusion", fusion::to_string(c.fusion)},
            {"threshold", c.threshold}};
  if (c.seed) j["seed"] = *c.seed;
  return j;
}

json to_json(const Experiment& e) {
  json conditions = json::array();
  for (const auto& c : e.conditions) conditions.push_back(to_json(c));
  return {{"seed", e.seed}, {"jobs", e.jobs}, {"save_models", e.save_models}, {"conditions", conditions}};
}

Experiment parse_experiment(const json& j) {
  if (!j.is_object()) fail(ErrorCode::kInvalidArgument, "experiment config must be a JSON object");
  static const std::set<std::string> known = {"seed",   "jobs",      "save_models", "classifier",
                                              "fusion", "threshold", "conditions"};
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) fail(ErrorCode::kInvalidArgument, "unknown experiment key '" + key + "'");
  }
  Experiment e;
  classifier::ClassifierConfig base;
  auto fusion_default = fusion::FusionMethod::kMean;
  double threshold_default = fusion::kDefaultThreshold;
  auto parse_fusion = [](const json& v) {
    const auto text = v.get<std::string>();
    const auto m = fusion::parse_fusion_method(text);
    if (!m) fail(ErrorCode::kInvalidArgument, "unknown fusion method '" + text + "'");
    return *m;
  };
  try {
    e.seed = j.value("seed", e.seed);
    e.jobs = j.value("jobs", e.jobs);
    e.save_models = j.value("save_models", e.save_models);
    if (j.contains("classifier")) base = j.at("classifier").get<classifier::ClassifierConfig>();
    if (j.contains("fusion")) fusion_default = parse_fusion(j.at("fusion"));
    threshold_default = j.value("threshold", threshold_default);
    const json conditions = j.value("conditions", json(preset_condition_names()));
    if (!conditions.is_array()) fail(ErrorCode::kInvalidArgument, "conditions must be an array");
    for (const auto& item : conditions) {
      ExperimentCondition c;
      if (item.is_string()) {
        c = preset_condition(item.get<std::string>(), base);
        c.fusion = fusion_default;
        c.threshold = threshold_default;
      } else {
        static const std::set<std::string> ckeys = {"name",   "preset",    "train", "test", "scheme",
                                                    "classifier", "fusion", "threshold", "seed"};
        if (!item.is_object()) fail(ErrorCode::kInvalidArgument, "condition must be a name or an object");
        for (const auto& [key, _] : item.items()) {
          if (!ckeys.contains(key)) fail(ErrorCode::kInvalidArgument, "unknown condition key '" + key + "'");
        }
        if (item.contains("preset")) {
          c = preset_condition(item.at("preset").get<std::string>(), base);
        } else {
          c.classifier = base;
        }
        c.fusion = fusion_default;
        c.threshold = threshold_default;
        if (item.contains("name")) c.name = item.at("name").get<std::string>();
        if (item.contains("train")) c.train_datasets = item.at("train").get<std::vector<std::string>>();
        if (item.contains("test")) c.test_datasets = item.at("test").get<std::vector<std::string>>();
        if (item.contains("scheme")) {
          const auto text = item.at("scheme").get<std::string>();
          const auto s = parse_scheme(text);
          if (!s) fail(ErrorCode::kInvalidArgument, "unknown scheme '" + text + "'");
          c.scheme = *s;
        } else if (!item.contains("preset")) {
          c.scheme = as_set(c.train_datasets) == as_set(c.test_datasets) ? eval::Scheme::kLopo
                                                                          : eval::Scheme::kFixedSplit;
        }
        if (item.contains("classifier")) {
          // Condition-level keys override the experiment defaults.
          json merged = base;
          merged.update(item.at("classifier"));
          c.classifier = merged.get<classifier::ClassifierConfig>();
        }
        if (item.contains("fusion")) c.fusion = parse_fusion(item.at("fusion"));
        c.threshold = item.value("threshold", c.threshold);
        if (item.contains("seed")) c.seed = item.at("seed").get<std::uint64_t>();
      }
      c.validate();
      e.conditions.push_back(std::move(c));
    }
  } catch (const json::exception& ex) {
    fail(ErrorCode::kInvalidArgument, std::string("malformed experiment config: ") + ex.what());
  }
  if (e.jobs < 1) fail(ErrorCode::kInvalidArgument, "jobs must be >= 1");
  std::set<std::string> names;
  for (const auto& c : e.conditions) {
    if (!names.insert(condition_dir_name(c.name)).second) {
      fail(ErrorCode::kInvalidArgument, "duplicate condition name '" + c.name + "'");
    }
  }
  return e;
}

Experiment load_experiment(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot read experiment config '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kInvalidArgument, "experiment config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_experiment(j);
}

std::string condition_dir_name(std::string_view name) {
  std::string out;
  for (char ch : name) {
    const bool keep = std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_' || ch == '+' || ch == '.';
    out += keep ? ch : '_';
  }
  return out;
}

std::string corpus_hash(const ingest::Manifest& manifest) {
  Fnv1a h;
  for (const auto& r : manifest.records()) {
    h.field(r.image_id).field(r.patient_id).field(r.sequence_id).field(r.dataset_id).field(r.site);
    h.field(ingest::to_string(r.label));
    h.update_u64(hash_file(r.path));
  }
  return h.hex();
}

std::uint64_t condition_seed(const Experiment& experiment, const ExperimentCondition& condition) {
  return condition.seed ? *condition.seed : derive_seed(experiment.seed, condition.name);
}

namespace {

struct ImagePatches {
  std::optional<fov::PatchSet> patches;
  std::string excluded_reason;
};

// Patches of every record, extracted once and shared by all folds.
std::vector<ImagePatches> extract_all(const ingest::Manifest& manifest, int patch_size) {
  std::vector<ImagePatches> out(manifest.size());
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    const auto& rec = manifest.records()[i];
    const GrayImage image = read_image(rec.path);
    try {
      const auto mask = fov::detect_fov(image, patch_size);
      auto set = fov::extract_patches(image, mask, patch_size, patch_size, rec.image_id);
      if (set.empty()) {
        out[i].excluded_reason = "image has no usable patches";
      } else {
        out[i].patches = std::move(set);
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerate) throw;
      out[i].excluded_reason = e.what();
    }
  }
  return out;
}

std::vector<std::string> patients_of(const ingest::Manifest& manifest) { return manifest.patient_ids(); }

std::vector<std::size_t> records_of(const ingest::Manifest& manifest, const std::vector<std::string>& patients,
                                    const std::set<std::string>& datasets) {
  const std::set<std::string> pool(patients.begin(), patients.end());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    const auto& r = manifest.records()[i];
    if (pool.contains(r.patient_id) && datasets.contains(r.dataset_id)) out.push_back(i);
  }
  return out;
}

// Runner-level audit, independent of FoldPlan::check.
void audit_leakage(const ingest::Manifest& manifest, const std::vector<std::size_t>& train,
                   const std::vector<std::size_t>& test, std::size_t fold) {
  std::unordered_set<std::string> images, patients;
  for (auto i : train) {
    images.insert(manifest.records()[i].image_id);
    patients.insert(manifest.records()[i].patient_id);
  }
  for (auto i : test) {
    const auto& r = manifest.records()[i];
    if (images.contains(r.image_id) || patients.contains(r.patient_id)) {
      fail(ErrorCode::kValidation, "leakage in fold " + std::to_string(fold) + ": image '" + r.image_id +
                                       "' (patient '" + r.patient_id + "') is on both sides");
    }
  }
}

struct FoldOutput {
  FoldResult result;
  std::vector<std::pair<std::size_t, fusion::PredictionRow>> rows;  // keyed by manifest index
  std::exception_ptr error;
  bool done = false;
};

json fold_json(const FoldResult& f, bool with_timings) {
  json log = json::array();
  for (const auto& e : f.training_log) log.push_back({{"epoch", e.epoch}, {"loss", e.loss}, {"accuracy", e.accuracy}});
  json j = {{"index", f.index},
            {"seed", f.seed},
            {"train_patients", f.train_patients},
            {"test_patients", f.test_patients},
            {"train_images", f.train_images},
            {"train_patches", f.train_patches},
            {"test_images", f.test_images},
            {"model", f.model_path},
            {"training_log", log}};
  if (with_timings) j["timings"] = {{"train_seconds", f.train_seconds}, {"predict_seconds", f.predict_seconds}};
  return j;
}

json provenance_json(const Provenance& p) {
  return {{"config_hash", p.config_hash}, {"corpus_hash", p.corpus_hash}, {"seed", p.seed}};
}

void dump_condition(const ConditionResult& r, const fs::path& dir, bool partial) {
  fs::create_directories(dir);
  json folds = json::array();
  for (const auto& f : r.folds) folds.push_back(fold_json(f, true));
  json excluded = json::array();
  for (const auto& e : r.excluded) excluded.push_back({{"image_id", e.image_id}, {"reason", e.reason}});
  {
    std::ofstream out(dir / "folds.json", std::ios::binary);
    out << json({{"condition", to_json(r.condition)},
                 {"provenance", provenance_json(r.provenance)},
                 {"status", r.ok ? "ok" : "failed"},
                 {"error", r.error},
                 {"wall_seconds", r.wall_seconds},
                 {"excluded", excluded},
                 {"folds", folds}})
               .dump(2)
        << '\n';
  }
  fusion::write_predictions_csv(r.predictions, dir / (partial ? "partial_predictions.csv" : "predictions.csv"));
  if (partial) return;
  json report = eval::to_json(r.report);
  report["provenance"] = provenance_json(r.provenance);
  report["scheme"] = eval::to_string(r.condition.scheme);
  report["n_folds"] = r.folds.size();
  report["excluded_images"] = r.excluded.size();
  {
    std::ofstream out(dir / "report.json", std::ios::binary);
    if (!out) fail(ErrorCode::kIo, "cannot write '" + (dir / "report.json").string() + "'");
    out << report.dump(2) << '\n';
  }
  eval::write_roc_csv(r.report, dir / "roc.csv");
  eval::write_per_patient_csv(r.report, dir / "per_patient.csv");
}

}  // namespace

ConditionResult run_condition(const ExperimentCondition& condition, const ingest::Manifest& manifest,
                              std::uint64_t cond_seed, const RunOptions& options) {
  const auto wall_start = std::chrono::steady_clock::now();
  condition.validate();
  ConditionResult result;
  result.condition = condition;
  result.condition.seed = cond_seed;

  std::vector<std::string> all_datasets = condition.train_datasets;
  all_datasets.insert(all_datasets.end(), condition.test_datasets.begin(), condition.test_datasets.end());
  std::sort(all_datasets.begin(), all_datasets.end());
  all_datasets.erase(std::unique(all_datasets.begin(), all_datasets.end()), all_datasets.end());
  const ingest::Manifest pool = ingest::select(manifest, all_datasets);

  result.provenance.seed = cond_seed;
  result.provenance.config_hash = Fnv1a().update(to_json(result.condition).dump()).hex();
  result.provenance.corpus_hash = corpus_hash(pool);

  const std::set<std::string> train_ds = as_set(condition.train_datasets);
  const std::set<std::string> test_ds = as_set(condition.test_datasets);
  eval::FoldPlan plan;
  if (condition.scheme == eval::Scheme::kLopo) {
    plan = eval::plan_lopo(patients_of(pool), condition.name);
  } else {
    plan = eval::plan_cross_site(patients_of(ingest::select(pool, condition.train_datasets)),
                                 patients_of(ingest::select(pool, condition.test_datasets)), condition.name);
  }
  plan.check();

  const int patch_size = condition.classifier.patch_size;
  const auto patches = extract_all(pool, patch_size);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (!patches[i].patches) {
      result.excluded.push_back({pool.records()[i].image_id, patches[i].excluded_reason});
      log::warn("excluding '" + pool.records()[i].image_id + "': " + patches[i].excluded_reason);
    }
  }

  std::vector<FoldOutput> outputs(plan.folds.size());
  auto run_fold = [&](std::size_t k) {
    auto& out = outputs[k];
    const auto& fold = plan.folds[k];
    auto& fr = out.result;
    fr.index = k;
    fr.seed = derive_seed(cond_seed, static_cast<std::uint64_t>(k));
    fr.train_patients = fold.train_patients;
    fr.test_patients = fold.test_patients;
    const auto train_idx = records_of(pool, fold.train_patients, train_ds);
    const auto test_idx = records_of(pool, fold.test_patients, test_ds);
    audit_leakage(pool, train_idx, test_idx, k);

    classifier::LabeledPatches data;
    data.patch_size = patch_size;
    for (auto i : train_idx) {
      if (!patches[i].patches) continue;
      data.append(*patches[i].patches, pool.records()[i].label);
      ++fr.train_images;
    }
    fr.train_patches = data.size();

    auto cfg = condition.classifier;
    cfg.seed = fr.seed;
    auto t0 = std::chrono::steady_clock::now();
    const auto model = classifier::train(cfg, data);
    fr.train_seconds = seconds_since(t0);
    fr.training_log = model->training_log();

    if (options.save_models && !options.out_dir.empty()) {
      Fnv1a h;
      h.update(json(cfg).dump()).field(result.provenance.corpus_hash);
      for (auto i : train_idx) h.field(pool.records()[i].image_id);
      const fs::path rel = fs::path("models") / h.hex() / "model.bin";
      fs::create_directories((options.out_dir / rel).parent_path());
      classifier::save_classifier(*model, options.out_dir / rel);
      fr.model_path = rel.generic_string();
    }

    t0 = std::chrono::steady_clock::now();
    for (auto i : test_idx) {
      if (!patches[i].patches) continue;
      const auto& rec = pool.records()[i];
      const auto probs = model->predict(*patches[i].patches);
      const auto fused = fusion::fuse(probs, condition.fusion);
      out.rows.push_back({i,
                          {rec.image_id, rec.patient_id, rec.dataset_id, rec.label, fused.carcinoma,
                           fusion::decide(fused.carcinoma, condition.threshold), probs.size()}});
      ++fr.test_images;
    }
    fr.predict_seconds = seconds_since(t0);
    out.done = true;
  };

  const int jobs = std::max(1, std::min<int>(options.jobs, static_cast<int>(plan.folds.size())));
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  auto worker = [&] {
    for (std::size_t k = next++; k < plan.folds.size() && !stop; k = next++) {
      try {
        run_fold(k);
      } catch (...) {
        outputs[k].error = std::current_exception();
        stop = true;
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool_threads;
    for (int t = 0; t < jobs; ++t) pool_threads.emplace_back(worker);
    for (auto& t : pool_threads) t.join();
  }

  // Assemble by fold index, then restore manifest order.
  std::vector<std::pair<std::size_t, fusion::PredictionRow>> rows;
  std::exception_ptr first_error;
  for (auto& out : outputs) {
    if (out.error && !first_error) first_error = out.error;
    if (!out.done) continue;
    result.folds.push_back(out.result);
    rows.insert(rows.end(), out.rows.begin(), out.rows.end());
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (auto& [_, row] : rows) result.predictions.push_back(std::move(row));

  const fs::path dir = options.out_dir.empty() ? fs::path() : options.out_dir / condition_dir_name(condition.name);
  if (first_error) {
    try {
      std::rethrow_exception(first_error);
    } catch (const std::exception& e) {
      result.error = e.what();
    }
    result.wall_seconds = seconds_since(wall_start);
    if (!dir.empty()) dump_condition(result, dir, true);
    std::rethrow_exception(first_error);
  }

  const auto scored = eval::to_scored(result.predictions);
  result.report = eval::compute_metrics(scored, condition.name);
  result.ok = true;
  result.wall_seconds = seconds_since(wall_start);
  if (!dir.empty()) dump_condition(result, dir, false);
  return result;
}

SuiteResult run_suite(const Experiment& experiment, const ingest::Manifest& manifest, const fs::path& out_dir) {
  SuiteResult suite;
  if (!out_dir.empty()) fs::create_directories(out_dir);
  RunOptions options{out_dir, experiment.jobs, experiment.save_models};
  for (const auto& c : experiment.conditions) {
    const std::uint64_t seed = condition_seed(experiment, c);
    try {
      log::info("running condition '" + c.name + "'");
      suite.conditions.push_back(run_condition(c, manifest, seed, options));
    } catch (const std::exception& e) {
      log::error("condition '" + c.name + "' failed: " + e.what());
      ConditionResult failed;
      failed.condition = c;
      failed.condition.seed = seed;
      failed.provenance.seed = seed;
      failed.error = e.what();
      suite.conditions.push_back(std::move(failed));
    }
  }
  if (!out_dir.empty()) {
    std::ofstream csv_out(out_dir / "results.csv", std::ios::binary);
    if (!csv_out) fail(ErrorCode::kIo, "cannot write results table");
    csv_out << results_csv(suite);
    std::ofstream json_out(out_dir / "results.json", std::ios::binary);
    json_out << results_json(suite).dump(2) << '\n';
  }
  return suite;
}

std::string results_csv(const SuiteResult& suite) {
  std::ostringstream out;
  out << "condition,train,test,scheme,folds,images,accuracy,precision,recall,auc,status\n";
  for (const auto& r : suite.conditions) {
    const auto& c = r.condition;
    out << csv::join({c.name, join_ids(c.train_datasets, '+'), join_ids(c.test_datasets, '+'),
                      std::string(eval::to_string(c.scheme)), std::to_string(r.folds.size()),
                      std::to_string(r.report.n_images), format_optional(r.report.accuracy),
                      format_optional(r.report.precision), format_optional(r.report.recall),
                      format_optional(r.report.auc), r.ok ? "ok" : "failed"})
        << '\n';
  }
  return out.str();
}

json results_json(const SuiteResult& suite) {
  json rows = json::array();
  for (const auto& r : suite.conditions) {
    json row = to_json(r.condition);
    row["status"] = r.ok ? "ok" : "failed";
    if (!r.ok) row["error"] = r.error;
    row["provenance"] = provenance_json(r.provenance);
    if (r.ok) {
      json rep = eval::to_json(r.report);
      row["n_images"] = rep["n_images"];
      row["confusion"] = rep["confusion"];
      for (const char* key : {"accuracy", "precision", "recall", "auc"}) row[key] = rep[key];
      row["n_folds"] = r.folds.size();
    }
    rows.push_back(std::move(row));
  }
  return {{"conditions", rows}};
}

}  // namespace cle::experiment
