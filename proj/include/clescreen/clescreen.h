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

#ifndef CLESCREEN_CLESCREEN_H_
#define CLESCREEN_CLESCREEN_H_

/*
 * C interface to the cle-screen library: CLE frame ingest, circular
 * field-of-view patch extraction, patch classification, probability fusion,
 * evaluation, image-quality analytics, experiment orchestration and the
 * synthetic corpus generator.
 *
 * Every function that can fail returns a cle_status. On failure the message
 * is available from cle_last_error() on the same thread until the next call.
 * Handles are opaque and must be released with the matching *_free function.
 * Strings returned through char** are owned by the caller; release them with
 * cle_string_free().
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(CLESCREEN_BUILDING)
#define CLE_API __declspec(dllexport)
#else
#define CLE_API __declspec(dllimport)
#endif
#else
#define CLE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cle_status {
  CLE_OK = 0,
  CLE_ERR_INVALID_ARGUMENT = 1,
  CLE_ERR_IO = 2,
  CLE_ERR_VALIDATION = 3,
  CLE_ERR_FORMAT = 4,
  CLE_ERR_DEGENERATE = 5,
  CLE_ERR_SIZE_MISMATCH = 6,
  CLE_ERR_NOT_FOUND = 7,
  CLE_ERR_INTERNAL = 8
} cle_status;

typedef enum cle_log_level {
  CLE_LOG_DEBUG = 0,
  CLE_LOG_INFO = 1,
  CLE_LOG_WARNING = 2,
  CLE_LOG_ERROR = 3
} cle_log_level;

typedef enum cle_label { CLE_HEALTHY = 0, CLE_CARCINOMA = 1 } cle_label;

typedef struct cle_manifest cle_manifest;
typedef struct cle_image cle_image;
typedef struct cle_fov cle_fov;
typedef struct cle_patches cle_patches;
typedef struct cle_classifier cle_classifier;

/* ---- library ---------------------------------------------------------- */

CLE_API const char* cle_version(void);
CLE_API const char* cle_status_string(cle_status status);
/* Message of the last failed call on this thread; "" if none. */
CLE_API const char* cle_last_error(void);
CLE_API void cle_string_free(char* text);

/* Messages at or above the minimum level go to `fn`; NULL restores stderr. */
typedef void (*cle_log_fn)(cle_log_level level, const char* message, void* user);
CLE_API void cle_set_log_callback(cle_log_fn fn, void* user);
CLE_API void cle_set_log_level(cle_log_level level);

/* ---- data ingest ------------------------------------------------------ */

typedef struct cle_dataset_summary {
  const char* dataset_id; /* valid while the manifest lives */
  size_t patients;
  size_t sequences;
  size_t images;
} cle_dataset_summary;

CLE_API cle_status cle_manifest_load(const char* path, int verify_images, cle_manifest** out);
CLE_API void cle_manifest_free(cle_manifest* manifest);
CLE_API size_t cle_manifest_size(const cle_manifest* manifest);
CLE_API size_t cle_manifest_dataset_count(const cle_manifest* manifest);
CLE_API cle_status cle_manifest_dataset(const cle_manifest* manifest, size_t index, cle_dataset_summary* out);
CLE_API size_t cle_manifest_warning_count(const cle_manifest* manifest);
CLE_API const char* cle_manifest_warning(const cle_manifest* manifest, size_t index);
/* Records of the listed datasets, in manifest order. */
CLE_API cle_status cle_manifest_select(const cle_manifest* manifest, const char* const* dataset_ids, size_t count,
                                       cle_manifest** out);

/* ---- images, field of view, patches ----------------------------------- */

CLE_API cle_status cle_image_load(const char* path, cle_image** out);
/* Copies width * height bytes, row-major. */
CLE_API cle_status cle_image_create(int width, int height, const uint8_t* pixels, cle_image** out);
CLE_API void cle_image_free(cle_image* image);
CLE_API int cle_image_width(const cle_image* image);
CLE_API int cle_image_height(const cle_image* image);
CLE_API const uint8_t* cle_image_data(const cle_image* image);

/* Pixel (x, y) covers [x, x+1) x [y, y+1); disk coordinates use that frame. */
typedef struct cle_disk {
  double cx;
  double cy;
  double radius;
} cle_disk;

CLE_API cle_status cle_fov_detect(const cle_image* image, int patch_size, cle_fov** out);
CLE_API cle_status cle_fov_from_disk(cle_disk disk, cle_fov** out);
/* Non-zero bytes of the width * height mask are inside the field of view. */
CLE_API cle_status cle_fov_from_mask(int width, int height, const uint8_t* mask, cle_fov** out);
CLE_API void cle_fov_free(cle_fov* fov);
/* CLE_ERR_INVALID_ARGUMENT for explicit masks. */
CLE_API cle_status cle_fov_disk(const cle_fov* fov, cle_disk* out);
CLE_API cle_status cle_patch_count_upper_bound(const cle_fov* fov, int patch_size, int stride, size_t* out);

/* stride <= 0 means stride = patch_size. Patches are ordered row-major. */
CLE_API cle_status cle_extract_patches(const cle_image* image, const cle_fov* fov, int patch_size, int stride,
                                       cle_patches** out);
CLE_API void cle_patches_free(cle_patches* patches);
CLE_API size_t cle_patches_count(const cle_patches* patches);
CLE_API int cle_patches_size(const cle_patches* patches);
/* CLE_ERR_NOT_FOUND when index >= count. */
CLE_API cle_status cle_patches_origin(const cle_patches* patches, size_t index, int* x, int* y);
/* count * size * size bytes, patch after patch. */
CLE_API const uint8_t* cle_patches_data(const cle_patches* patches);

/* Writes patch tiles and index.csv; `written` receives the tile count. */
CLE_API cle_status cle_export_patches(const cle_manifest* manifest, int patch_size, int stride, const char* out_dir,
                                      size_t* written);

/* ---- classifier ------------------------------------------------------- */

/* config_json: classifier configuration as JSON text, or NULL for defaults. */
CLE_API cle_status cle_classifier_train_patches(const uint8_t* pixels, const cle_label* labels, size_t count,
                                                int patch_size, const char* config_json, cle_classifier** out);
/* Trains on every usable patch of the manifest's images. */
CLE_API cle_status cle_classifier_train_manifest(const cle_manifest* manifest, const char* config_json,
                                                 cle_classifier** out);
CLE_API cle_status cle_classifier_save(const cle_classifier* classifier, const char* path);
CLE_API cle_status cle_classifier_load(const char* path, cle_classifier** out);
CLE_API void cle_classifier_free(cle_classifier* classifier);
CLE_API int cle_classifier_patch_size(const cle_classifier* classifier);
/* JSON with "config" and "training_log". */
CLE_API cle_status cle_classifier_info(const cle_classifier* classifier, char** json_out);
/* probs receives 2 * count doubles: (healthy, carcinoma) per patch. */
CLE_API cle_status cle_classifier_predict(const cle_classifier* classifier, const uint8_t* pixels, size_t count,
                                          int patch_size, double* probs);

/* ---- fusion and inference --------------------------------------------- */

/* method: "mean", "median", "max-carcinoma" or "geometric-mean". probs holds
 * count (healthy, carcinoma) pairs; fused receives the fused carcinoma
 * probability. */
CLE_API cle_status cle_fuse(const double* probs, size_t count, const char* method, double* fused);
/* fused (may be NULL) receives the fused carcinoma probability. */
CLE_API cle_status cle_classify_image(const cle_classifier* classifier, const cle_image* image, const cle_fov* fov,
                                      const char* method, double threshold, double* fused, cle_label* decision);
/* Writes the prediction CSV; `excluded` receives the number of skipped images. */
CLE_API cle_status cle_predict_manifest(const cle_classifier* classifier, const cle_manifest* manifest,
                                        const char* method, double threshold, const char* out_csv, size_t* excluded);

/* ---- evaluation ------------------------------------------------------- */

/* Metrics of a prediction CSV. With out_dir set, writes report.json, roc.csv
 * and per_patient.csv there. report_json may be NULL. */
CLE_API cle_status cle_evaluate_csv(const char* predictions_csv, const char* out_dir, char** report_json);

/* ---- quality analytics ------------------------------------------------ */

/* group_by: "site" or "dataset"; label: "healthy", "carcinoma" or NULL (all). */
CLE_API cle_status cle_quality(const cle_manifest* manifest, const char* group_by, int bins, int include_outside_fov,
                               const char* label, const char* out_dir);

/* ---- experiments and synthetic corpora -------------------------------- */

/* experiment_json NULL runs the five standard conditions with defaults.
 * results_csv may be NULL. */
CLE_API cle_status cle_run_experiment(const cle_manifest* manifest, const char* experiment_json, const char* out_dir,
                                      char** results_csv);

/* config_json may name a preset ({"preset": "reference"}) and override fields;
 * NULL generates the "reference" preset.
 * out (may be NULL) receives the generated manifest. */
CLE_API cle_status cle_synth_generate(const char* config_json, const char* out_dir, int force, cle_manifest** out);

#ifdef __cplusplus
}
#endif

#endif /* CLESCREEN_CLESCREEN_H_ */
