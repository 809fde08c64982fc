#ifndef BIDFM_H
#define BIDFM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BidfmStatus {
  BIDFM_STATUS_OK = 0,
  BIDFM_STATUS_NULL_POINTER = 1,
  BIDFM_STATUS_DIMENSION = 2,
  BIDFM_STATUS_INVALID = 3,
  BIDFM_STATUS_DOMAIN = 4,
  BIDFM_STATUS_INFEASIBLE = 5,
  BIDFM_STATUS_PRECONDITION = 6,
  BIDFM_STATUS_UNSUPPORTED = 7,
  BIDFM_STATUS_PARSE = 8,
  BIDFM_STATUS_CONFIG = 9,
  BIDFM_STATUS_IO = 10,
  BIDFM_STATUS_CONVERGENCE = 11,
  BIDFM_STATUS_BUFFER_TOO_SMALL = 12,
  BIDFM_STATUS_PANIC = 13,
} BidfmStatus;

/**
 * Detection algorithms, numbered as accepted by [`bidfm_detect`].
 */
typedef enum BidfmAlgorithm {
  BIDFM_ALGORITHM_BISC = 0,
  BIDFM_ALGORITHM_NBISC = 1,
  BIDFM_ALGORITHM_DISIM = 2,
  BIDFM_ALGORITHM_DSCORE = 3,
  BIDFM_ALGORITHM_RDSCORE = 4,
} BidfmAlgorithm;

typedef struct BidfmDetection BidfmDetection;

typedef struct BidfmMatrix BidfmMatrix;

typedef struct BidfmModel BidfmModel;

/**
 * Agreement of one estimated partition with the truth.
 */
typedef struct BidfmMetrics {
  double error_rate;
  double nmi;
  double ari;
} BidfmMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *bidfm_last_error_message(void);

/**
 * Library version as a static string.
 */
const char *bidfm_version(void);

/**
 * Copies `rows * cols` row-major values into a new matrix.
 *
 * # Safety
 * `data` must point to `rows * cols` readable doubles and `out` must be writable.
 */
enum BidfmStatus bidfm_matrix_new(uintptr_t rows,
                                  uintptr_t cols,
                                  const double *data,
                                  struct BidfmMatrix **out);

/**
 * Reads a dense matrix text file.
 *
 * # Safety
 * `path` must be a nul-terminated string and `out` writable.
 */
enum BidfmStatus bidfm_matrix_read(const char *path, struct BidfmMatrix **out);

/**
 * # Safety
 * `m` must be a live matrix handle and `path` a nul-terminated string.
 */
enum BidfmStatus bidfm_matrix_write(const struct BidfmMatrix *m, const char *path);

/**
 * # Safety
 * `m` must be a live matrix handle or null.
 */
uintptr_t bidfm_matrix_rows(const struct BidfmMatrix *m);

/**
 * # Safety
 * `m` must be a live matrix handle or null.
 */
uintptr_t bidfm_matrix_cols(const struct BidfmMatrix *m);

/**
 * Copies the values, row-major, into `buf` of capacity `len`.
 *
 * # Safety
 * `m` must be a live matrix handle and `buf` writable for `len` doubles.
 */
enum BidfmStatus bidfm_matrix_copy(const struct BidfmMatrix *m, double *buf, uintptr_t len);

/**
 * # Safety
 * `m` must come from this library and not be used afterwards. Null is ignored.
 */
void bidfm_matrix_free(struct BidfmMatrix *m);

/**
 * Builds a model from a TOML configuration.
 *
 * # Safety
 * `toml` must be a nul-terminated string and `out` writable.
 */
enum BidfmStatus bidfm_model_from_toml(const char *toml, struct BidfmModel **out);

/**
 * # Safety
 * `model` must be a live model handle and `out` writable.
 */
enum BidfmStatus bidfm_model_expected_adjacency(const struct BidfmModel *model,
                                                struct BidfmMatrix **out);

/**
 * Samples an adjacency matrix from the model's configured distribution.
 *
 * # Safety
 * `model` must be a live model handle and `out` writable.
 */
enum BidfmStatus bidfm_model_sample(const struct BidfmModel *model,
                                    uint64_t seed,
                                    struct BidfmMatrix **out);

/**
 * Copies the true row labels (1-based) into `buf`.
 *
 * # Safety
 * `model` must be a live model handle and `buf` writable for `len` values.
 */
enum BidfmStatus bidfm_model_row_labels(const struct BidfmModel *model,
                                        uint32_t *buf,
                                        uintptr_t len);

/**
 * Copies the true column labels (1-based) into `buf`.
 *
 * # Safety
 * `model` must be a live model handle and `buf` writable for `len` values.
 */
enum BidfmStatus bidfm_model_col_labels(const struct BidfmModel *model,
                                        uint32_t *buf,
                                        uintptr_t len);

/**
 * # Safety
 * `model` must come from this library and not be used afterwards. Null is ignored.
 */
void bidfm_model_free(struct BidfmModel *model);

/**
 * Clusters rows into `k_r` and columns into `k_c` groups. `algorithm` is a
 * [`BidfmAlgorithm`] value.
 *
 * # Safety
 * `a` must be a live matrix handle and `out` writable.
 */
enum BidfmStatus bidfm_detect(const struct BidfmMatrix *a,
                              uint32_t algorithm,
                              uintptr_t k_r,
                              uintptr_t k_c,
                              uint64_t seed,
                              struct BidfmDetection **out);

/**
 * # Safety
 * `d` must be a live detection handle or null.
 */
uintptr_t bidfm_detection_rows(const struct BidfmDetection *d);

/**
 * # Safety
 * `d` must be a live detection handle or null.
 */
uintptr_t bidfm_detection_cols(const struct BidfmDetection *d);

/**
 * # Safety
 * `d` must be a live detection handle and `buf` writable for `len` values.
 */
enum BidfmStatus bidfm_detection_row_labels(const struct BidfmDetection *d,
                                            uint32_t *buf,
                                            uintptr_t len);

/**
 * # Safety
 * `d` must be a live detection handle and `buf` writable for `len` values.
 */
enum BidfmStatus bidfm_detection_col_labels(const struct BidfmDetection *d,
                                            uint32_t *buf,
                                            uintptr_t len);

/**
 * # Safety
 * `d` must come from this library and not be used afterwards. Null is ignored.
 */
void bidfm_detection_free(struct BidfmDetection *d);

/**
 * Error rate, NMI and ARI of `estimated` against `truth`, both 1-based of length `n`.
 *
 * # Safety
 * Both label arrays must hold `n` readable values and `out` must be writable.
 */
enum BidfmStatus bidfm_metrics(const uint32_t *estimated,
                               const uint32_t *truth,
                               uintptr_t n,
                               struct BidfmMetrics *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BIDFM_H */
