/* Copyright 2026 The cood Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to libcood. Every function returns a cood_status; on failure
 * cood_last_error() holds a message for the calling thread. Handles are
 * opaque and released with the matching *_free function. */

#ifndef COOD_COOD_H_
#define COOD_COOD_H_

#include <stddef.h>
#include <stdint.h>

#if defined(COOD_BUILDING_LIBRARY)
#define COOD_API __attribute__((visibility("default")))
#else
#define COOD_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cood_status {
  COOD_OK = 0,
  COOD_ERR_NOT_POSITIVE_DEFINITE,
  COOD_ERR_DOMAIN,
  COOD_ERR_SHAPE_MISMATCH,
  COOD_ERR_TOO_FEW_SAMPLES,
  COOD_ERR_BATCH_TOO_SMALL,
  COOD_ERR_ZERO_EMBEDDING,
  COOD_ERR_LABEL_OUT_OF_RANGE,
  COOD_ERR_INCOMPATIBLE_INPUT,
  COOD_ERR_WINDOW_OUT_OF_BOUNDS,
  COOD_ERR_EMPTY_SIDE,
  COOD_ERR_EMPTY_LIST,
  COOD_ERR_MISALIGNED_RUNS,
  COOD_ERR_NOT_NORMALIZED,
  COOD_ERR_EMPTY_SET,
  COOD_ERR_UNKNOWN_CLASS,
  COOD_ERR_MISSING_LABELS,
  COOD_ERR_EMPTY_CLASS,
  COOD_ERR_INVALID_DISTANCE_MATRIX,
  COOD_ERR_EMPTY_DATASET,
  COOD_ERR_MALFORMED_FILE,
  COOD_ERR_EMPTY_AFTER_FILTER,
  COOD_ERR_INCOMPATIBLE_MODEL,
  COOD_ERR_IO,
  COOD_ERR_CONFIG,
  COOD_ERR_INVALID_ARGUMENT,
  COOD_ERR_INTERNAL
} cood_status;

typedef struct cood_config cood_config;
typedef struct cood_model cood_model;

/* Called once per finished epoch. stage is 0 (contrastive) or 1 (joint). */
typedef void (*cood_progress_fn)(void* user, uint64_t seed, size_t epoch, int stage,
                                 double contrastive_loss, double class_loss, double lr);

COOD_API const char* cood_version(void);
COOD_API const char* cood_last_error(void);
COOD_API const char* cood_status_name(cood_status status);
/* 0 success, 2 config error, 3 data error, 4 numeric failure, 1 otherwise. */
COOD_API int cood_status_exit_code(cood_status status);

COOD_API cood_status cood_config_new(cood_config** out);
COOD_API cood_status cood_config_load(const char* path, cood_config** out);
COOD_API cood_status cood_config_parse(const char* text, cood_config** out);
COOD_API cood_status cood_config_set(cood_config* config, const char* key, const char* value);
/* Writes at most `capacity` bytes including the terminator; *needed gets the
 * full length without it. Either output may be NULL. */
COOD_API cood_status cood_config_get(const cood_config* config, const char* key, char* buffer,
                                     size_t capacity, size_t* needed);
COOD_API cood_status cood_config_hash(const cood_config* config, uint64_t* out);
COOD_API void cood_config_free(cood_config* config);

/* seed may be NULL to use the config's seed list. */
COOD_API cood_status cood_train(const cood_config* config, const uint64_t* seed,
                                const char* out_dir, cood_progress_fn progress, void* user);
/* inlier_path / outlier_path may be NULL to use the config's test / OOD sets. */
COOD_API cood_status cood_eval(const cood_config* config, const char* model_dir,
                               const char* inlier_path, const char* outlier_path,
                               const char* out_dir);
COOD_API cood_status cood_clp(const cood_config* config, const uint64_t* seed,
                              const char* out_dir, cood_progress_fn progress, void* user);
COOD_API cood_status cood_ablate(const cood_config* config, const uint64_t* seed,
                                 const char* out_dir, cood_progress_fn progress, void* user);
COOD_API cood_status cood_gen_data(const cood_config* config, const uint64_t* seed,
                                   const char* out_dir);

/* Trained model: encoder parameters plus the fitted Gaussian bank, loaded
 * from a directory written by cood_train. */
COOD_API cood_status cood_model_load(const char* model_dir, cood_model** out);
COOD_API size_t cood_model_input_dim(const cood_model* model);
COOD_API size_t cood_model_num_classes(const cood_model* model);
/* inputs is row-major rows x input_dim. best_class may be NULL. */
COOD_API cood_status cood_model_score(const cood_model* model, const double* inputs, size_t rows,
                                      size_t dim, double* scores, size_t* best_class);
COOD_API void cood_model_free(cood_model* model);

#ifdef __cplusplus
}
#endif

#endif /* COOD_COOD_H_ */
