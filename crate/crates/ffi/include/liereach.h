#ifndef LIEREACH_H
#define LIEREACH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum LrStatus {
  LR_STATUS_OK = 0,
  LR_STATUS_NULL_POINTER = 1,
  LR_STATUS_INVALID_ARGUMENT = 2,
  LR_STATUS_PARSE_ERROR = 3,
  /**
   * The run stopped early; the handle still holds the partial tube.
   */
  LR_STATUS_INJECTIVITY_EXCEEDED = 4,
  /**
   * The run stopped early; the handle still holds the partial tube.
   */
  LR_STATUS_NON_MONOTONE_STEP = 5,
  LR_STATUS_ANGLE_AT_CUT = 6,
  LR_STATUS_BRANCH_VIOLATION = 7,
  LR_STATUS_IO_ERROR = 8,
  LR_STATUS_OUT_OF_RANGE = 9,
  LR_STATUS_PANIC = 10,
} LrStatus;

/**
 * Opaque reach tube.
 */
typedef struct LrTube LrTube;

/**
 * Summary of a Monte-Carlo validation.
 */
typedef struct LrValidation {
  size_t samples;
  size_t checkpoints;
  bool all_contained;
  double min_fraction;
  /**
   * NaN when no sample left the tube.
   */
  double first_violation_t;
  double worst_margin;
} LrValidation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message into `buf` (NUL-terminated, truncated to
 * `len`). Returns the full message length excluding the terminator.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t lr_last_error(char *buf, size_t len);

/**
 * Parses an experiment from TOML text and runs it.
 *
 * On success or early stop `*out` receives a new handle; on early stop the
 * status names the reason and the handle holds the steps computed so far.
 *
 * # Safety
 * `config_toml` must be a NUL-terminated string; `out` must be writable.
 */
enum LrStatus lr_run(const char *config_toml, struct LrTube **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `tube` must come from [`lr_run`] and not be used afterwards.
 */
void lr_tube_free(struct LrTube *tube);

/**
 * Number of entries (steps + 1), or 0 for a null handle.
 *
 * # Safety
 * `tube` must be null or a live handle.
 */
size_t lr_tube_len(const struct LrTube *tube);

/**
 * Algebra dimension (2 for the torus, 3 for SO(3)), or 0 for a null handle.
 *
 * # Safety
 * `tube` must be null or a live handle.
 */
size_t lr_tube_dim(const struct LrTube *tube);

/**
 * Number of doubles in a center: 9 for SO(3), 4 per torus factor.
 *
 * # Safety
 * `tube` must be null or a live handle.
 */
size_t lr_tube_center_len(const struct LrTube *tube);

/**
 * Index of the step that failed, written to `*step`; false if the run
 * completed. The tube then holds entries `0..=step`.
 *
 * # Safety
 * `tube` must be null or a live handle; `step` must be null or writable.
 */
bool lr_tube_stopped_at(const struct LrTube *tube, size_t *step);

/**
 * Copies entry `index`: time, box bounds (`dim` doubles each), center
 * (row-major blocks, `center_len` doubles) and the recentering flag. Any
 * output pointer may be null to skip it.
 *
 * # Safety
 * Non-null outputs must have room for the documented number of values.
 */
enum LrStatus lr_tube_entry(const struct LrTube *tube,
                            size_t index,
                            double *t,
                            double *lower,
                            double *upper,
                            double *center,
                            bool *recentered);

/**
 * Validates a tube against Monte-Carlo trajectories of the experiment in
 * `config_toml`, using its sampling settings and the given seed.
 *
 * # Safety
 * `tube` must be a live handle, `config_toml` a NUL-terminated string and
 * `out` writable.
 */
enum LrStatus lr_validate(const struct LrTube *tube,
                          const char *config_toml,
                          uint64_t seed,
                          struct LrValidation *out);

/**
 * `exp(hat(v))` on SO(3), written row-major to `r[9]`.
 *
 * # Safety
 * `v` must point to 3 doubles and `r` to 9 writable doubles.
 */
enum LrStatus lr_so3_exp(const double *v, double *r);

/**
 * Principal logarithm of the row-major rotation `r[9]`, written to `v[3]`.
 *
 * # Safety
 * `r` must point to 9 doubles and `v` to 3 writable doubles.
 */
enum LrStatus lr_so3_log(const double *r, double *v);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LIEREACH_H */
