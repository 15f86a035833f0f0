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

// cle-screen: command-line front end. Talks to the library only through the
// C interface in clescreen/clescreen.h.

#include <cstdio>
#include <cstdint>
#include <fstream>
#include <optional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "clescreen/clescreen.h"

namespace {

struct CommandError {
  int exit_code;
};

void check(cle_status status, const char* what) {
  if (status == CLE_OK) return;
  std::cerr << "cle-screen: " << what << ": " << cle_last_error() << " (" << cle_status_string(status) << ")\n";
  throw CommandError{static_cast<int>(status) + 1};
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "cle-screen: cannot read '" << path << "'\n";
    throw CommandError{3};
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

template <class T, void (*Free)(T*)>
struct Handle {
  T* ptr = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(ptr); }
  T** out() { return &ptr; }
  T* get() const { return ptr; }
};

using Manifest = Handle<cle_manifest, cle_manifest_free>;
using Classifier = Handle<cle_classifier, cle_classifier_free>;

struct OwnedString {
  char* ptr = nullptr;
  ~OwnedString() { cle_string_free(ptr); }
};

void load_manifest(Manifest& m, const std::string& path, bool verify, const std::vector<std::string>& datasets) {
  check(cle_manifest_load(path.c_str(), verify ? 1 : 0, m.out()), "loading manifest");
  if (datasets.empty()) return;
  std::vector<const char*> ids;
  for (const auto& d : datasets) ids.push_back(d.c_str());
  Manifest selected;
  check(cle_manifest_select(m.get(), ids.data(), ids.size(), selected.out()), "selecting datasets");
  std::swap(m.ptr, selected.ptr);
}

// Appends `fields` to a JSON object text; later keys win when parsed.
std::string with_overrides(std::string config, const std::string& fields) {
  if (fields.empty()) return config;
  const auto open = config.find('{');
  const auto close = config.rfind('}');
  if (open == std::string::npos || close == std::string::npos || close < open) {
    std::cerr << "cle-screen: config must be a JSON object\n";
    throw CommandError{2};
  }
  const bool empty_object = config.find_first_not_of(" \t\r\n", open + 1) == close;
  config.insert(close, (empty_object ? "" : ",") + fields);
  return config;
}

void log_to_stderr(cle_log_level level, const char* message, void*) {
  static const char* names[] = {"debug", "info", "warning", "error"};
  std::fprintf(stderr, "[cle-screen] %s: %s\n", names[level], message);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Patch-based CLE image classification and cross-site evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(cle_version()));
  bool verbose = false;
  bool quiet = false;
  app.add_flag("-v,--verbose", verbose, "Log progress messages");
  app.add_flag("-q,--quiet", quiet, "Only log errors");

  // validate
  auto* validate = app.add_subcommand("validate", "Check a manifest and print per-dataset counts");
  std::string v_manifest;
  bool v_no_images = false;
  validate->add_option("-m,--manifest", v_manifest, "Manifest CSV")->required();
  validate->add_flag("--no-image-check", v_no_images, "Skip decoding the referenced images");

  // patchify
  auto* patchify = app.add_subcommand("patchify", "Export field-of-view patches as PNG tiles");
  std::string p_manifest, p_out;
  int p_patch = 80, p_stride = 0;
  std::vector<std::string> p_datasets;
  patchify->add_option("-m,--manifest", p_manifest, "Manifest CSV")->required();
  patchify->add_option("-o,--out", p_out, "Output directory")->required();
  patchify->add_option("--patch", p_patch, "Patch edge length in pixels")->capture_default_str();
  patchify->add_option("--stride", p_stride, "Grid stride (default: patch size)");
  patchify->add_option("--datasets", p_datasets, "Restrict to these datasets");

  // train
  auto* train = app.add_subcommand("train", "Train a patch classifier on a manifest");
  std::string t_manifest, t_config, t_out;
  std::vector<std::string> t_datasets;
  std::optional<int> t_epochs;
  std::optional<std::uint64_t> t_seed;
  train->add_option("-m,--manifest", t_manifest, "Manifest CSV")->required();
  train->add_option("-c,--config", t_config, "Classifier config (JSON)");
  train->add_option("-o,--out", t_out, "Model file to write")->required();
  train->add_option("--datasets", t_datasets, "Train on these datasets only");
  train->add_option("--epochs", t_epochs, "Override the configured epoch count");
  train->add_option("--seed", t_seed, "Override the configured seed");

  // predict
  auto* predict = app.add_subcommand("predict", "Classify every image of a manifest");
  std::string r_model, r_manifest, r_out, r_fusion = "mean";
  double r_threshold = 0.5;
  std::vector<std::string> r_datasets;
  predict->add_option("--model", r_model, "Model file")->required();
  predict->add_option("-m,--manifest", r_manifest, "Manifest CSV")->required();
  predict->add_option("-o,--out", r_out, "Prediction CSV to write")->required();
  predict->add_option("--fusion", r_fusion, "mean | median | max-carcinoma | geometric-mean")->capture_default_str();
  predict->add_option("--threshold", r_threshold, "Carcinoma decision threshold")->capture_default_str();
  predict->add_option("--datasets", r_datasets, "Restrict to these datasets");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Compute metrics from a prediction CSV");
  std::string e_predictions, e_out;
  evaluate->add_option("-p,--predictions", e_predictions, "Prediction CSV")->required();
  evaluate->add_option("-o,--out", e_out, "Directory for report.json, roc.csv, per_patient.csv");

  // quality
  auto* quality = app.add_subcommand("quality", "Median-brightness histograms per site or dataset");
  std::string q_manifest, q_out, q_group = "site", q_label;
  int q_bins = 32;
  bool q_corners = false;
  quality->add_option("-m,--manifest", q_manifest, "Manifest CSV")->required();
  quality->add_option("-o,--out", q_out, "Output directory")->required();
  quality->add_option("--group-by", q_group, "site | dataset")->capture_default_str();
  quality->add_option("--bins", q_bins, "Histogram bins over [0, 255]")->capture_default_str();
  quality->add_option("--label", q_label, "Only images with this label (healthy | carcinoma)");
  quality->add_flag("--include-corners", q_corners, "Use every pixel, not only the field of view");

  // run
  auto* run = app.add_subcommand("run", "Run an experiment suite");
  std::string x_manifest, x_experiment, x_out;
  run->add_option("-m,--manifest", x_manifest, "Manifest CSV")->required();
  run->add_option("-e,--experiment", x_experiment, "Experiment config (JSON); default: the five standard conditions");
  run->add_option("-o,--out", x_out, "Output directory")->required();

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
  std::string s_config, s_preset, s_out;
  std::optional<std::uint64_t> s_seed;
  bool s_force = false;
  synth->add_option("-c,--config", s_config, "Generator config (JSON)");
  synth->add_option("--preset", s_preset, "reference | brightness | texture-only | separable");
  synth->add_option("-o,--out", s_out, "Corpus directory")->required();
  synth->add_option("--seed", s_seed, "Override the seed");
  synth->add_flag("--force", s_force, "Write into a non-empty directory");

  CLI11_PARSE(app, argc, argv);

  cle_set_log_callback(log_to_stderr, nullptr);
  cle_set_log_level(quiet ? CLE_LOG_ERROR : verbose ? CLE_LOG_INFO : CLE_LOG_WARNING);

  try {
    if (*validate) {
      Manifest m;
      load_manifest(m, v_manifest, !v_no_images, {});
      std::cout << "dataset,patients,sequences,images\n";
      for (size_t i = 0; i < cle_manifest_dataset_count(m.get()); ++i) {
        cle_dataset_summary s;
        check(cle_manifest_dataset(m.get(), i, &s), "reading summary");
        std::cout << s.dataset_id << ',' << s.patients << ',' << s.sequences << ',' << s.images << '\n';
      }
      for (size_t i = 0; i < cle_manifest_warning_count(m.get()); ++i) {
        std::cerr << "warning: " << cle_manifest_warning(m.get(), i) << '\n';
      }
    } else if (*patchify) {
      Manifest m;
      load_manifest(m, p_manifest, true, p_datasets);
      size_t written = 0;
      check(cle_export_patches(m.get(), p_patch, p_stride, p_out.c_str(), &written), "exporting patches");
      std::cout << written << " patches written to " << p_out << '\n';
    } else if (*train) {
      Manifest m;
      load_manifest(m, t_manifest, true, t_datasets);
      std::string fields;
      if (t_epochs) fields += "\"epochs\":" + std::to_string(*t_epochs);
      if (t_seed) fields += std::string(fields.empty() ? "" : ",") + "\"seed\":" + std::to_string(*t_seed);
      const std::string config = with_overrides(t_config.empty() ? "{}" : read_text(t_config), fields);
      Classifier c;
      check(cle_classifier_train_manifest(m.get(), config.c_str(), c.out()), "training");
      check(cle_classifier_save(c.get(), t_out.c_str()), "saving model");
      OwnedString info;
      check(cle_classifier_info(c.get(), &info.ptr), "reading training log");
      std::cout << info.ptr << '\n';
    } else if (*predict) {
      Manifest m;
      load_manifest(m, r_manifest, true, r_datasets);
      Classifier c;
      check(cle_classifier_load(r_model.c_str(), c.out()), "loading model");
      size_t excluded = 0;
      check(cle_predict_manifest(c.get(), m.get(), r_fusion.c_str(), r_threshold, r_out.c_str(), &excluded),
            "predicting");
      if (excluded) std::cerr << excluded << " image(s) excluded\n";
    } else if (*evaluate) {
      OwnedString report;
      check(cle_evaluate_csv(e_predictions.c_str(), e_out.empty() ? nullptr : e_out.c_str(), &report.ptr),
            "evaluating");
      std::cout << nlohmann::json::parse(report.ptr).dump(2) << '\n';
    } else if (*quality) {
      Manifest m;
      load_manifest(m, q_manifest, true, {});
      check(cle_quality(m.get(), q_group.c_str(), q_bins, q_corners ? 1 : 0, q_label.empty() ? nullptr : q_label.c_str(),
                        q_out.c_str()),
            "quality analysis");
    } else if (*run) {
      Manifest m;
      load_manifest(m, x_manifest, true, {});
      const std::string experiment = x_experiment.empty() ? std::string() : read_text(x_experiment);
      OwnedString table;
      check(cle_run_experiment(m.get(), x_experiment.empty() ? nullptr : experiment.c_str(), x_out.c_str(),
                               &table.ptr),
            "running experiment");
      std::cout << table.ptr;
    } else if (*synth) {
      if (!s_config.empty() && !s_preset.empty()) {
        std::cerr << "cle-screen: --config and --preset are mutually exclusive\n";
        return 2;
      }
      std::string config;
      if (!s_config.empty()) {
        config = read_text(s_config);
      } else {
        config = "{\"preset\":\"" + (s_preset.empty() ? std::string("reference") : s_preset) + "\"}";
      }
      if (s_seed) config = with_overrides(config, "\"seed\":" + std::to_string(*s_seed));
      Manifest m;
      check(cle_synth_generate(config.c_str(), s_out.c_str(), s_force ? 1 : 0, m.out()), "generating corpus");
      std::cout << "dataset,patients,sequences,images\n";
      for (size_t i = 0; i < cle_manifest_dataset_count(m.get()); ++i) {
        cle_dataset_summary s;
        check(cle_manifest_dataset(m.get(), i, &s), "reading summary");
        std::cout << s.dataset_id << ',' << s.patients << ',' << s.sequences << ',' << s.images << '\n';
      }
    }
  } catch (const CommandError& e) {
    return e.exit_code;
  }
  return 0;
}
