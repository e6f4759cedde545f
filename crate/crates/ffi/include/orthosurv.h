#ifndef ORTHOSURV_H
#define ORTHOSURV_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum OsStatus {
  OS_STATUS_OK = 0,
  OS_STATUS_NULL_POINTER = 1,
  OS_STATUS_INVALID_ARGUMENT = 2,
  OS_STATUS_DIMENSION_MISMATCH = 3,
  OS_STATUS_INVALID_DATA = 4,
  OS_STATUS_IO = 5,
  OS_STATUS_FIT_FAILED = 6,
  OS_STATUS_PANIC = 7,
} OsStatus;

/**
 * Opaque dataset handle.
 */
typedef struct OsDataset OsDataset;

/**
 * Opaque handle to cross-fitted nuisance models.
 */
typedef struct OsNuisances OsNuisances;

/**
 * Opaque handle to a fitted effect model.
 */
typedef struct OsTauModel OsTauModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call into this library.
 */
const char *os_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *os_version(void);

/**
 * Draws `n` rows from a synthetic scenario (1 or 2) and setting (`full`,
 * `low_treatment`, `low_censoring`, `low_survival` or a `+`-joined mix).
 *
 * # Safety
 * `setting` must be a NUL-terminated string; `out` must be writable.
 */
enum OsStatus os_dataset_generate(uint32_t scenario,
                                  const char *setting,
                                  size_t n,
                                  uint64_t seed,
                                  struct OsDataset **out);

/**
 * Loads a dataset CSV. `t_max < 0` uses the largest observed time.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum OsStatus os_dataset_load_csv(const char *path, int64_t t_max, struct OsDataset **out);

/**
 * Number of rows (0 for a null handle).
 *
 * # Safety
 * `ds` must be null or a live handle.
 */
size_t os_dataset_len(const struct OsDataset *ds);

/**
 * Covariate dimension (0 for a null handle).
 *
 * # Safety
 * `ds` must be null or a live handle.
 */
size_t os_dataset_dim(const struct OsDataset *ds);

/**
 * Last grid step (0 for a null handle).
 *
 * # Safety
 * `ds` must be null or a live handle.
 */
size_t os_dataset_t_max(const struct OsDataset *ds);

/**
 * Copies the row-major `len x dim` covariate matrix into `buf`.
 *
 * # Safety
 * `buf` must hold `buf_len` doubles.
 */
enum OsStatus os_dataset_covariates(const struct OsDataset *ds, double *buf, size_t buf_len);

/**
 * # Safety
 * `ds` must be null or a handle not yet freed.
 */
void os_dataset_free(struct OsDataset *ds);

/**
 * True effect `S_t(x, 1) - S_t(x, 0)` of a synthetic scenario.
 *
 * # Safety
 * `x` must point to `dim` doubles; `setting` must be NUL-terminated.
 */
enum OsStatus os_true_cate(uint32_t scenario,
                           const char *setting,
                           const double *x,
                           size_t dim,
                           size_t t,
                           double *out);

/**
 * Weighting value `f` of a scheme (`none`, `t`, `c`, `s`, `tc`, `ts`, `cs`,
 * `tcs`) at the given propensity and previous-step survival values.
 *
 * # Safety
 * `scheme` must be NUL-terminated; `out` must be writable.
 */
enum OsStatus os_weight(const char *scheme,
                        double pi,
                        double s1_prev,
                        double s0_prev,
                        double g1_prev,
                        double g0_prev,
                        double *out);

/**
 * Cross-fits propensity and hazard networks with `k` folds using the
 * default architecture.
 *
 * # Safety
 * `ds` must be a live handle; `out` must be writable.
 */
enum OsStatus os_nuisances_fit(const struct OsDataset *ds,
                               size_t k,
                               uint64_t seed,
                               struct OsNuisances **out);

/**
 * # Safety
 * `n` must be null or a handle not yet freed.
 */
void os_nuisances_free(struct OsNuisances *n);

/**
 * Fits the second-stage effect model for horizon `t` and weighting scheme.
 * `nuis` must have been fitted on the same dataset.
 *
 * # Safety
 * Handles must be live; `scheme` NUL-terminated; `out` writable.
 */
enum OsStatus os_tau_fit(const struct OsDataset *ds,
                         const struct OsNuisances *nuis,
                         const char *scheme,
                         size_t t,
                         uint64_t seed,
                         struct OsTauModel **out);

/**
 * Predicts effects for `n_rows` row-major covariate vectors of length `dim`.
 *
 * # Safety
 * `x` must hold `n_rows * dim` doubles and `out` `n_rows` doubles.
 */
enum OsStatus os_tau_predict(const struct OsTauModel *m,
                             const double *x,
                             size_t n_rows,
                             size_t dim,
                             double *out);

/**
 * # Safety
 * `m` must be null or a handle not yet freed.
 */
void os_tau_free(struct OsTauModel *m);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ORTHOSURV_H */
