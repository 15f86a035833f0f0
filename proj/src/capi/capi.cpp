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

#include "clescreen/clescreen.h"

#include <cstring>
#include <fstream>
#include <memory>
#include <new>
#include <sstream>
#include <string>

#include <json.hpp>

#include "classifier/classifier.hpp"
#include "common/error.hpp"
#include "common/image.hpp"
#include "common/log.hpp"
#include "evaluation/metrics.hpp"
#include "evaluation/report_io.hpp"
#include "experiment/experiment.hpp"
#include "fov/fov.hpp"
#include "fov/patch_export.hpp"
#include "fusion/fusion.hpp"
#include "fusion/inference.hpp"
#include "ingest/manifest.hpp"
#include "quality/quality.hpp"
#include "synth/synth.hpp"

struct cle_manifest {
  cle::ingest::Manifest manifest;
  std::vector<cle::ingest::DatasetSummary> summaries;

  explicit cle_manifest(cle::ingest::Manifest m) : manifest(std::move(m)), summaries(manifest.summaries()) {}
};

struct cle_image {
  cle::GrayImage image;
};

struct cle_fov {
  cle::fov::FovMask mask;
};

struct cle_patches {
  cle::fov::PatchSet set;
};

struct cle_classifier {
  std::unique_ptr<cle::classifier::PatchClassifier> model;
};

namespace {

using cle::ErrorCode;

thread_local std::string g_last_error;

cle_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return CLE_ERR_INVALID_ARGUMENT;
    case ErrorCode::kIo: return CLE_ERR_IO;
    case ErrorCode::kValidation: return CLE_ERR_VALIDATION;
    case ErrorCode::kFormat: return CLE_ERR_FORMAT;
    case ErrorCode::kDegenerate: return CLE_ERR_DEGENERATE;
    case ErrorCode::kSizeMismatch: return CLE_ERR_SIZE_MISMATCH;
    case ErrorCode::kNotFound: return CLE_ERR_NOT_FOUND;
    case ErrorCode::kInternal: return CLE_ERR_INTERNAL;
  }
  return CLE_ERR_INTERNAL;
}

template <class F>
cle_status guarded(F&& body) {
  g_last_error.clear();
  try {
    body();
    return CLE_OK;
  } catch (const cle::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const nlohmann::json::exception& e) {
    g_last_error = std::string("invalid JSON: ") + e.what();
    return CLE_ERR_INVALID_ARGUMENT;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return CLE_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CLE_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return CLE_ERR_INTERNAL;
  }
}

void require(bool condition, const char* what) {
  if (!condition) cle::fail(ErrorCode::kInvalidArgument, what);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

cle::fusion::FusionMethod fusion_method(const char* name) {
  if (!name) return cle::fusion::FusionMethod::kMean;
  const auto m = cle::fusion::parse_fusion_method(name);
  if (!m) cle::fail(ErrorCode::kInvalidArgument, std::string("unknown fusion method '") + name + "'");
  return *m;
}

cle::classifier::ClassifierConfig parse_classifier_config(const char* config_json) {
  cle::classifier::ClassifierConfig config;
  if (config_json) config = nlohmann::json::parse(config_json).get<cle::classifier::ClassifierConfig>();
  config.validate();
  return config;
}

}  // namespace

extern "C" {

const char* cle_version(void) { return "0.3.0"; }

const char* cle_status_string(cle_status status) {
  switch (status) {
    case CLE_OK: return "ok";
    case CLE_ERR_INVALID_ARGUMENT: return "invalid argument";
    case CLE_ERR_IO: return "i/o error";
    case CLE_ERR_VALIDATION: return "validation error";
    case CLE_ERR_FORMAT: return "format error";
    case CLE_ERR_DEGENERATE: return "degenerate input";
    case CLE_ERR_SIZE_MISMATCH: return "size mismatch";
    case CLE_ERR_NOT_FOUND: return "not found";
    case CLE_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* cle_last_error(void) { return g_last_error.c_str(); }

void cle_string_free(char* text) { std::free(text); }

void cle_set_log_callback(cle_log_fn fn, void* user) {
  if (!fn) {
    cle::log::set_sink({});
    return;
  }
  cle::log::set_sink([fn, user](cle::log::Level level, const std::string& message) {
    fn(static_cast<cle_log_level>(level), message.c_str(), user);
  });
}

void cle_set_log_level(cle_log_level level) { cle::log::set_min_level(static_cast<cle::log::Level>(level)); }

cle_status cle_manifest_load(const char* path, int verify_images, cle_manifest** out) {
  return guarded([&] {
    require(path && out, "path and out must not be NULL");
    *out = new cle_manifest(cle::ingest::load_manifest(path, {verify_images != 0}));
  });
}

void cle_manifest_free(cle_manifest* manifest) { delete manifest; }

size_t cle_manifest_size(const cle_manifest* manifest) { return manifest ? manifest->manifest.size() : 0; }

size_t cle_manifest_dataset_count(const cle_manifest* manifest) {
  return manifest ? manifest->summaries.size() : 0;
}

cle_status cle_manifest_dataset(const cle_manifest* manifest, size_t index, cle_dataset_summary* out) {
  return guarded([&] {
    require(manifest && out, "manifest and out must not be NULL");
    if (index >= manifest->summaries.size()) cle::fail(ErrorCode::kNotFound, "dataset index out of range");
    const auto& s = manifest->summaries[index];
    *out = {s.dataset_id.c_str(), s.patients, s.sequences, s.images};
  });
}

size_t cle_manifest_warning_count(const cle_manifest* manifest) {
  return manifest ? manifest->manifest.warnings().size() : 0;
}

const char* cle_manifest_warning(const cle_manifest* manifest, size_t index) {
  if (!manifest || index >= manifest->manifest.warnings().size()) return nullptr;
  return manifest->manifest.warnings()[index].c_str();
}

cle_status cle_manifest_select(const cle_manifest* manifest, const char* const* dataset_ids, size_t count,
                               cle_manifest** out) {
  return guarded([&] {
    require(manifest && out && (dataset_ids || count == 0), "arguments must not be NULL");
    std::vector<std::string> ids;
    for (size_t i = 0; i < count; ++i) {
      require(dataset_ids[i] != nullptr, "dataset id must not be NULL");
      ids.emplace_back(dataset_ids[i]);
    }
    *out = new cle_manifest(cle::ingest::select(manifest->manifest, ids));
  });
}

cle_status cle_image_load(const char* path, cle_image** out) {
  return guarded([&] {
    require(path && out, "path and out must not be NULL");
    *out = new cle_image{cle::read_image(path)};
  });
}

cle_status cle_image_create(int width, int height, const uint8_t* pixels, cle_image** out) {
  return guarded([&] {
    require(out && pixels && width > 0 && height > 0, "invalid image arguments");
    const size_t n = static_cast<size_t>(width) * static_cast<size_t>(height);
    *out = new cle_image{cle::GrayImage(width, height, std::vector<uint8_t>(pixels, pixels + n))};
  });
}

void cle_image_free(cle_image* image) { delete image; }
int cle_image_width(const cle_image* image) { return image ? image->image.width() : 0; }
int cle_image_height(const cle_image* image) { return image ? image->image.height() : 0; }
const uint8_t* cle_image_data(const cle_image* image) { return image ? image->image.pixels().data() : nullptr; }

cle_status cle_fov_detect(const cle_image* image, int patch_size, cle_fov** out) {
  return guarded([&] {
    require(image && out, "image and out must not be NULL");
    *out = new cle_fov{cle::fov::detect_fov(image->image, patch_size)};
  });
}

cle_status cle_fov_from_disk(cle_disk disk, cle_fov** out) {
  return guarded([&] {
    require(out != nullptr, "out must not be NULL");
    *out = new cle_fov{cle::fov::FovMask::disk(disk.cx, disk.cy, disk.radius)};
  });
}

cle_status cle_fov_from_mask(int width, int height, const uint8_t* mask, cle_fov** out) {
  return guarded([&] {
    require(out && mask && width > 0 && height > 0, "invalid mask arguments");
    const size_t n = static_cast<size_t>(width) * static_cast<size_t>(height);
    *out = new cle_fov{cle::fov::FovMask::explicit_mask(width, height, std::vector<uint8_t>(mask, mask + n))};
  });
}

void cle_fov_free(cle_fov* fov) { delete fov; }

cle_status cle_fov_disk(const cle_fov* fov, cle_disk* out) {
  return guarded([&] {
    require(fov && out, "fov and out must not be NULL");
    require(fov->mask.is_disk(), "field of view is an explicit mask");
    const auto& d = fov->mask.disk_geometry();
    *out = {d.cx, d.cy, d.radius};
  });
}

cle_status cle_patch_count_upper_bound(const cle_fov* fov, int patch_size, int stride, size_t* out) {
  return guarded([&] {
    require(fov && out, "fov and out must not be NULL");
    *out = cle::fov::patch_count_upper_bound(fov->mask, patch_size, stride);
  });
}

cle_status cle_extract_patches(const cle_image* image, const cle_fov* fov, int patch_size, int stride,
                               cle_patches** out) {
  return guarded([&] {
    require(image && fov && out, "image, fov and out must not be NULL");
    *out = new cle_patches{cle::fov::extract_patches(image->image, fov->mask, patch_size, stride)};
  });
}

void cle_patches_free(cle_patches* patches) { delete patches; }
size_t cle_patches_count(const cle_patches* patches) { return patches ? patches->set.size() : 0; }
int cle_patches_size(const cle_patches* patches) { return patches ? patches->set.patch_size : 0; }

cle_status cle_patches_origin(const cle_patches* patches, size_t index, int* x, int* y) {
  return guarded([&] {
    require(patches && x && y, "arguments must not be NULL");
    if (index >= patches->set.size()) cle::fail(ErrorCode::kNotFound, "patch index out of range");
    *x = patches->set.origins[index].x;
    *y = patches->set.origins[index].y;
  });
}

const uint8_t* cle_patches_data(const cle_patches* patches) {
  return patches ? patches->set.pixels.data() : nullptr;
}

cle_status cle_export_patches(const cle_manifest* manifest, int patch_size, int stride, const char* out_dir,
                              size_t* written) {
  return guarded([&] {
    require(manifest && out_dir, "manifest and out_dir must not be NULL");
    const auto summary = cle::fov::export_patches(manifest->manifest, patch_size, stride, out_dir);
    if (written) *written = summary.patches;
  });
}

cle_status cle_classifier_train_patches(const uint8_t* pixels, const cle_label* labels, size_t count,
                                        int patch_size, const char* config_json, cle_classifier** out) {
  return guarded([&] {
    require(out && (count == 0 || (pixels && labels)), "arguments must not be NULL");
    auto config = parse_classifier_config(config_json);
    if (config.patch_size != patch_size) {
      cle::fail(ErrorCode::kSizeMismatch, "patch size differs from the classifier configuration");
    }
    cle::classifier::LabeledPatches data;
    data.patch_size = patch_size;
    const size_t n = static_cast<size_t>(patch_size) * static_cast<size_t>(patch_size);
    for (size_t i = 0; i < count; ++i) {
      require(labels[i] == CLE_HEALTHY || labels[i] == CLE_CARCINOMA, "invalid label");
      data.append(std::span<const uint8_t>(pixels + i * n, n), static_cast<cle::ingest::Label>(labels[i]));
    }
    *out = new cle_classifier{cle::classifier::train(config, data)};
  });
}

cle_status cle_classifier_train_manifest(const cle_manifest* manifest, const char* config_json,
                                         cle_classifier** out) {
  return guarded([&] {
    require(manifest && out, "manifest and out must not be NULL");
    const auto config = parse_classifier_config(config_json);
    const auto data = cle::fusion::collect_training_patches(manifest->manifest, config.patch_size);
    *out = new cle_classifier{cle::classifier::train(config, data)};
  });
}

cle_status cle_classifier_save(const cle_classifier* classifier, const char* path) {
  return guarded([&] {
    require(classifier && path, "classifier and path must not be NULL");
    cle::classifier::save_classifier(*classifier->model, path);
  });
}

cle_status cle_classifier_load(const char* path, cle_classifier** out) {
  return guarded([&] {
    require(path && out, "path and out must not be NULL");
    *out = new cle_classifier{cle::classifier::load_classifier(path)};
  });
}

void cle_classifier_free(cle_classifier* classifier) { delete classifier; }

int cle_classifier_patch_size(const cle_classifier* classifier) {
  return classifier ? classifier->model->patch_size() : 0;
}

cle_status cle_classifier_info(const cle_classifier* classifier, char** json_out) {
  return guarded([&] {
    require(classifier && json_out, "classifier and json_out must not be NULL");
    nlohmann::json log = nlohmann::json::array();
    for (const auto& e : classifier->model->training_log()) {
      log.push_back({{"epoch", e.epoch}, {"loss", e.loss}, {"accuracy", e.accuracy}});
    }
    nlohmann::json j = {{"config", classifier->model->config()},
                        {"training_log", log},
                        {"parameters", cle::classifier::parameter_count(classifier->model->config())}};
    *json_out = dup_string(j.dump());
  });
}

cle_status cle_classifier_predict(const cle_classifier* classifier, const uint8_t* pixels, size_t count,
                                  int patch_size, double* probs) {
  return guarded([&] {
    require(classifier && (count == 0 || (pixels && probs)), "arguments must not be NULL");
    const size_t n = static_cast<size_t>(patch_size) * static_cast<size_t>(patch_size);
    const auto out = classifier->model->predict(std::span<const uint8_t>(pixels, count * n), patch_size, count);
    for (size_t i = 0; i < out.size(); ++i) {
      probs[2 * i] = out[i].healthy;
      probs[2 * i + 1] = out[i].carcinoma;
    }
  });
}

cle_status cle_fuse(const double* probs, size_t count, const char* method, double* fused) {
  return guarded([&] {
    require(fused && (count == 0 || probs), "arguments must not be NULL");
    std::vector<cle::fusion::ProbPair> pairs(count);
    for (size_t i = 0; i < count; ++i) pairs[i] = {probs[2 * i], probs[2 * i + 1]};
    const auto r = cle::fusion::fuse(pairs, fusion_method(method));
    *fused = r.carcinoma;
  });
}

cle_status cle_classify_image(const cle_classifier* classifier, const cle_image* image, const cle_fov* fov,
                              const char* method, double threshold, double* fused, cle_label* decision) {
  return guarded([&] {
    require(classifier && image && fov, "arguments must not be NULL");
    const auto pred =
        cle::fusion::classify_image(image->image, fov->mask, *classifier->model, fusion_method(method), threshold);
    if (fused) {
      *fused = pred.fused.carcinoma;
    }
    if (decision) *decision = static_cast<cle_label>(pred.decision);
  });
}

cle_status cle_predict_manifest(const cle_classifier* classifier, const cle_manifest* manifest, const char* method,
                                double threshold, const char* out_csv, size_t* excluded) {
  return guarded([&] {
    require(classifier && manifest && out_csv, "arguments must not be NULL");
    const auto result =
        cle::fusion::predict_manifest(*classifier->model, manifest->manifest, fusion_method(method), threshold);
    cle::fusion::write_predictions_csv(result.rows, out_csv);
    if (excluded) *excluded = result.excluded.size();
  });
}

cle_status cle_evaluate_csv(const char* predictions_csv, const char* out_dir, char** report_json) {
  return guarded([&] {
    require(predictions_csv != nullptr, "predictions_csv must not be NULL");
    const auto rows = cle::fusion::read_predictions_csv(predictions_csv);
    const auto scored = cle::eval::to_scored(rows);
    const auto report = cle::eval::compute_metrics(scored, "evaluation");
    if (out_dir) cle::eval::write_report(report, std::filesystem::path(out_dir) / "report.json");
    if (report_json) *report_json = dup_string(cle::eval::to_json(report).dump());
  });
}

cle_status cle_quality(const cle_manifest* manifest, const char* group_by, int bins, int include_outside_fov,
                       const char* label, const char* out_dir) {
  return guarded([&] {
    require(manifest && out_dir, "manifest and out_dir must not be NULL");
    const auto group = cle::quality::parse_group_by(group_by ? group_by : "site");
    if (!group) cle::fail(ErrorCode::kInvalidArgument, "group_by must be 'site' or 'dataset'");
    std::optional<cle::ingest::Label> filter;
    if (label) {
      filter = cle::ingest::parse_label(label);
      if (!filter) cle::fail(ErrorCode::kInvalidArgument, std::string("unknown label '") + label + "'");
    }
    cle::quality::QualityStats stats;
    stats.bins = bins > 0 ? bins : cle::quality::kDefaultBins;
    stats.per_image = cle::quality::image_medians(manifest->manifest, {include_outside_fov != 0});
    stats.histograms = cle::quality::grouped_histogram(stats.per_image, manifest->manifest, *group, stats.bins, filter);
    cle::quality::write_quality(stats, *group, out_dir);
  });
}

cle_status cle_run_experiment(const cle_manifest* manifest, const char* experiment_json, const char* out_dir,
                              char** results_csv) {
  return guarded([&] {
    require(manifest != nullptr, "manifest must not be NULL");
    const auto experiment = cle::experiment::parse_experiment(
        experiment_json ? nlohmann::json::parse(experiment_json) : nlohmann::json::object());
    const auto suite = cle::experiment::run_suite(experiment, manifest->manifest, out_dir ? out_dir : "");
    if (results_csv) *results_csv = dup_string(cle::experiment::results_csv(suite));
  });
}

cle_status cle_synth_generate(const char* config_json, const char* out_dir, int force, cle_manifest** out) {
  return guarded([&] {
    require(out_dir != nullptr, "out_dir must not be NULL");
    cle::synth::SynthConfig config = cle::synth::preset("reference");
    if (config_json) config = nlohmann::json::parse(config_json).get<cle::synth::SynthConfig>();
    auto result = cle::synth::generate(config, out_dir, force != 0);
    if (out) *out = new cle_manifest(std::move(result.manifest));
  });
}

}  // extern "C"
