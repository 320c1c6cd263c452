#ifndef HPI_H
#define HPI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HpiStatus {
  HPI_STATUS_OK = 0,
  HPI_STATUS_NULL_POINTER = 1,
  HPI_STATUS_INVALID_UTF8 = 2,
  HPI_STATUS_IO = 3,
  HPI_STATUS_PARSE = 4,
  HPI_STATUS_INVALID_INPUT = 5,
  HPI_STATUS_INTERNAL = 6,
} HpiStatus;

/**
 * A trained model. Only ever handled through a pointer.
 */
typedef struct HpiModel HpiModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *hpi_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *hpi_version(void);

/**
 * Load a model file and store a new handle in `*out_model`.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out_model` a valid pointer.
 */
enum HpiStatus hpi_model_load(const char *path, struct HpiModel **out_model);

/**
 * Release a handle from [`hpi_model_load`]. NULL is ignored.
 *
 * # Safety
 * `model` must come from [`hpi_model_load`] and not be used afterwards.
 */
void hpi_model_free(struct HpiModel *model);

/**
 * Number of features the model expects (686 for pair vectors).
 *
 * # Safety
 * `model` must be a live handle or NULL (which yields 0).
 */
size_t hpi_model_dim(const struct HpiModel *model);

/**
 * Decision value for a host and a virus protein sequence.
 *
 * # Safety
 * Strings must be NUL-terminated; `model` a live handle; `out_score` valid.
 */
enum HpiStatus hpi_model_predict_sequences(const struct HpiModel *model,
                                           const char *host_sequence,
                                           const char *virus_sequence,
                                           double *out_score);

/**
 * Decision value for a precomputed feature vector of length `len`.
 *
 * # Safety
 * `features` must point to `len` readable doubles.
 */
enum HpiStatus hpi_model_decision(const struct HpiModel *model,
                                  const double *features,
                                  size_t len,
                                  double *out_score);

/**
 * Write the 343 normalized triad frequencies of `sequence` into `out`,
 * which must hold `out_len >= 343` doubles.
 *
 * # Safety
 * `sequence` must be NUL-terminated; `out` must point to `out_len` doubles.
 */
enum HpiStatus hpi_featurize(const char *sequence, double *out, size_t out_len);

/**
 * Global alignment score under BLOSUM62 with a linear gap penalty.
 *
 * # Safety
 * Strings must be NUL-terminated; `out_score` valid.
 */
enum HpiStatus hpi_align_score(const char *a,
                               const char *b,
                               int32_t gap_penalty,
                               int64_t *out_score);

/**
 * Area under the ROC curve. `labels[i]` is positive when nonzero.
 *
 * # Safety
 * `scores` and `labels` must each point to `n` readable elements.
 */
enum HpiStatus hpi_auc_roc(const double *scores, const int8_t *labels, size_t n, double *out_auc);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HPI_H */
