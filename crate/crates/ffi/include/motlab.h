#ifndef MOTLAB_H
#define MOTLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MotlabMinMethod {
  MOTLAB_MIN_METHOD_BRUTEFORCE = 0,
  MOTLAB_MIN_METHOD_MOT_EXACT = 1,
} MotlabMinMethod;

typedef enum MotlabStatus {
  MOTLAB_STATUS_OK = 0,
  MOTLAB_STATUS_NULL_ARGUMENT = 1,
  MOTLAB_STATUS_INVALID_UTF8 = 2,
  /**
   * Malformed JSON or a schema violation.
   */
  MOTLAB_STATUS_PARSE = 3,
  /**
   * Shapes, marginals, or parameters that fail validation.
   */
  MOTLAB_STATUS_INVALID_INPUT = 4,
  MOTLAB_STATUS_CAP_EXCEEDED = 5,
  /**
   * The solver stopped before meeting its tolerance; outputs are still set.
   */
  MOTLAB_STATUS_NOT_CONVERGED = 6,
  MOTLAB_STATUS_INFEASIBLE = 7,
  MOTLAB_STATUS_INTERNAL = 8,
  MOTLAB_STATUS_PANIC = 9,
} MotlabStatus;

/**
 * Opaque instance handle.
 */
typedef struct MotlabInstance MotlabInstance;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *motlab_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *motlab_version(void);

/**
 * Parses an instance document. On success `*out` owns a handle to be
 * released with [`motlab_instance_free`].
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum MotlabStatus motlab_instance_from_json(const char *json, struct MotlabInstance **out);

/**
 * # Safety
 * `handle` must come from [`motlab_instance_from_json`] and not be used afterwards. Null is ignored.
 */
void motlab_instance_free(struct MotlabInstance *handle);

/**
 * # Safety
 * `handle` must be a live handle; `n` and `k` valid pointers.
 */
enum MotlabStatus motlab_instance_shape(const struct MotlabInstance *handle, size_t *n, size_t *k);

/**
 * Cost of one tuple of 0-based indices.
 *
 * # Safety
 * `tuple` must point to `len` readable values; `out` must be valid.
 */
enum MotlabStatus motlab_evaluate(const struct MotlabInstance *handle,
                                  const size_t *tuple,
                                  size_t len,
                                  double *out);

/**
 * Exact MOT by linear programming on the instance's marginals. `value`
 * and `report` may each be null when not wanted.
 *
 * # Safety
 * `handle` must be live; non-null outputs must be valid pointers.
 */
enum MotlabStatus motlab_solve_lp(const struct MotlabInstance *handle,
                                  double *value,
                                  char **report);

/**
 * Entropic MOT by log-domain Sinkhorn. Returns [`MotlabStatus::NotConverged`]
 * with outputs filled in when `max_iters` runs out first.
 *
 * # Safety
 * As for [`motlab_solve_lp`].
 */
enum MotlabStatus motlab_sinkhorn(const struct MotlabInstance *handle,
                                  double eta,
                                  double tol,
                                  size_t max_iters,
                                  double *value,
                                  char **report);

/**
 * `min_j C_j - Σ_i p_i[j_i]` with the instance's weights (zero if absent).
 * `witness` receives `k` 0-based indices; `witness_len` must be at least `k`.
 *
 * # Safety
 * `witness` must point to `witness_len` writable values (or be null with
 * `witness_len == 0`); `value` must be valid.
 */
enum MotlabStatus motlab_solve_min(const struct MotlabInstance *handle,
                                   enum MotlabMinMethod method,
                                   double *value,
                                   size_t *witness,
                                   size_t witness_len);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards. Null is ignored.
 */
void motlab_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MOTLAB_H */
