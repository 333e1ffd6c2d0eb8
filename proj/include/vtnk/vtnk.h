/*
 * Copyright (C) 2026 The vtnk Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the vtnk try-on kernels. Every call returns a vtnk_status;
 * on failure vtnk_last_error() describes it (per thread, valid until the next
 * failing call on that thread). Handles are opaque and owned by the caller.
 */
#ifndef VTNK_VTNK_H
#define VTNK_VTNK_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(VTNK_BUILDING_LIBRARY)
#define VTNK_API __declspec(dllexport)
#else
#define VTNK_API __declspec(dllimport)
#endif
#else
#define VTNK_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum vtnk_status {
  VTNK_OK = 0,
  VTNK_INVALID_ARGUMENT = 1,
  VTNK_ALL_REGIONS_ABSENT = 2,
  VTNK_DIMENSION_MISMATCH = 3,
  VTNK_DEGENERATE_CORNERS = 4,
  VTNK_MISSING_HOMOGRAPHY = 5,
  VTNK_EMPTY_MASK = 6,
  VTNK_EXCESSIVE_IMAGINARY_RESIDUAL = 7,
  VTNK_NON_POSITIVE_TAU = 8,
  VTNK_SHAPE_MISMATCH = 9,
  VTNK_DIM_MISMATCH = 10,
  VTNK_INVALID_TARGET = 11,
  VTNK_INVALID_STEPS = 12,
  VTNK_HOOK_MISMATCH = 13,
  VTNK_BAD_MAGIC = 14,
  VTNK_UNSUPPORTED_VERSION = 15,
  VTNK_TRUNCATED_PAYLOAD = 16,
  VTNK_MALFORMED_DOCUMENT = 17,
  VTNK_WRONG_KEYPOINT_COUNT = 18,
  VTNK_UNSUPPORTED_FORMAT = 19,
  VTNK_DECODE_ERROR = 20,
  VTNK_IO_ERROR = 21,
  VTNK_INTERNAL = 22
} vtnk_status;

VTNK_API const char* vtnk_version(void);
VTNK_API const char* vtnk_last_error(void);
VTNK_API const char* vtnk_status_name(vtnk_status status);
/* Nonzero when the status was caused by caller input rather than a fault. */
VTNK_API int vtnk_status_is_input_error(vtnk_status status);

/* ---- Interchange tensors (float32, row-major) ---- */

typedef struct vtnk_tensor vtnk_tensor;

typedef struct vtnk_stats {
  double min;
  double max;
  double mean;
  double std;
} vtnk_stats;

VTNK_API vtnk_status vtnk_tensor_create(uint32_t rank, const uint32_t* dims, vtnk_tensor** out);
VTNK_API vtnk_status vtnk_tensor_read(const char* path, vtnk_tensor** out);
VTNK_API vtnk_status vtnk_tensor_write(const vtnk_tensor* tensor, const char* path);
VTNK_API void vtnk_tensor_free(vtnk_tensor* tensor);
VTNK_API uint32_t vtnk_tensor_rank(const vtnk_tensor* tensor);
VTNK_API uint32_t vtnk_tensor_dim(const vtnk_tensor* tensor, uint32_t axis);
VTNK_API size_t vtnk_tensor_size(const vtnk_tensor* tensor);
VTNK_API float* vtnk_tensor_data(vtnk_tensor* tensor);
VTNK_API vtnk_status vtnk_tensor_stats(const vtnk_tensor* tensor, vtnk_stats* out);

/* Standard-normal C x H x W tensor. */
VTNK_API vtnk_status vtnk_gaussian_noise(uint32_t channels, uint32_t height, uint32_t width, uint64_t seed,
                                         vtnk_tensor** out);

/* Low band of z_inv fused with the high band of z_rand (both C x H x W). */
VTNK_API vtnk_status vtnk_spi(const vtnk_tensor* z_inv, const vtnk_tensor* z_rand, double tau, vtnk_tensor** out);

/* ---- File-level stages ---- */

typedef struct vtnk_morph_request {
  const char* pseudo_image;
  const char* pseudo_pose;
  const char* pseudo_parse;
  const char* target_pose;
  const char* target_parse;
  const char* category; /* "upper", "lower" or "dress" */
  double confidence_threshold;
  const char* out_image;
  const char* out_mask; /* coverage; may be NULL */
} vtnk_morph_request;

VTNK_API vtnk_status vtnk_morph_files(const vtnk_morph_request* request);

typedef struct vtnk_pseudo_request {
  const char* garment;
  const char* garment_mask;
  const char* agnostic;
  const char* agnostic_mask;
  const char* prompt; /* interchange tensor; may be NULL */
  uint64_t seed;
  int32_t steps;
  int32_t person_injection;
  const char* out_image;
} vtnk_pseudo_request;

VTNK_API vtnk_status vtnk_pseudo_files(const vtnk_pseudo_request* request);

/* ---- Try-on jobs ---- */

typedef struct vtnk_job vtnk_job;

VTNK_API vtnk_status vtnk_job_load(const char* path, vtnk_job** out);
/* Overrides one key; the value is parsed as JSON, else taken as a string. */
VTNK_API vtnk_status vtnk_job_set(vtnk_job* job, const char* key, const char* value);
VTNK_API vtnk_status vtnk_job_run(const vtnk_job* job, const char* out_image);
VTNK_API void vtnk_job_free(vtnk_job* job);

/* ---- Backend exchange ----
 * mode: "self", "pseudo" or "stitch". Reads {layer}_{q,k,v}.vtnk from the
 * branch directories and writes {layer}_o.vtnk. garment_mask (PNG) is needed
 * for "stitch"; layers is a comma-separated id list or NULL for all. */
VTNK_API vtnk_status vtnk_exchange_modulate(const char* manifest, const char* mode, const char* primary_dir,
                                            const char* secondary_dir, const char* garment_mask,
                                            const char* layers);

#ifdef __cplusplus
}
#endif

#endif /* VTNK_VTNK_H */
