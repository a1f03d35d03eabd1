#ifndef SPARSEPOIS_H
#define SPARSEPOIS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SpStatus {
  SP_STATUS_OK = 0,
  SP_STATUS_NULL_POINTER = 1,
  SP_STATUS_INVALID_ARGUMENT = 2,
  SP_STATUS_DOMAIN = 3,
  SP_STATUS_LENGTH_MISMATCH = 4,
  SP_STATUS_UNKNOWN_DETECTOR = 5,
  SP_STATUS_FINGERPRINT_MISMATCH = 6,
  SP_STATUS_PARSE = 7,
  SP_STATUS_IO = 8,
  SP_STATUS_PANIC = 9,
} SpStatus;

typedef enum SpSidedness {
  SP_SIDEDNESS_TWO_SIDED = 0,
  SP_SIDEDNESS_ONE_SIDED = 1,
} SpSidedness;

typedef enum SpMeansScale {
  SP_MEANS_SCALE_LARGE = 0,
  SP_MEANS_SCALE_SMALL = 1,
} SpMeansScale;

typedef enum SpHypothesis {
  SP_HYPOTHESIS_NULL = 0,
  SP_HYPOTHESIS_ALTERNATIVE = 1,
} SpHypothesis;

/**
 * A resolved scenario: null means plus the alternative.
 */
typedef struct SpModel SpModel;

/**
 * Null means with cached tail tables and threshold sets.
 */
typedef struct SpNull SpNull;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread; empty when none. Valid until
 * the next failing call on the same thread.
 */
const char *sp_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *sp_version(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void sp_string_free(char *s);

/**
 * Natural log of the P-value of count `x` under Poisson(`lambda`).
 *
 * # Safety
 * `out` must be a valid pointer to a double.
 */
enum SpStatus sp_poisson_log_pvalue(double lambda,
                                    uint64_t x,
                                    enum SpSidedness sidedness,
                                    double *out);

/**
 * Natural log of `P(X >= x)` and `P(X <= x)` under Poisson(`lambda`). Either output may be null.
 *
 * # Safety
 * Non-null outputs must be valid pointers to doubles.
 */
enum SpStatus sp_poisson_log_tails(double lambda, uint64_t x, double *log_upper, double *log_lower);

/**
 * Detection boundary at `beta` (critical `s`, `r` or `gamma`).
 *
 * # Safety
 * `out` must be a valid pointer to a double.
 */
enum SpStatus sp_boundary(double beta,
                          enum SpSidedness sidedness,
                          enum SpMeansScale scale,
                          double *out);

/**
 * Prepares the null for `n` means.
 *
 * # Safety
 * `lambdas` must point to `n` doubles and `out` to a handle slot.
 */
enum SpStatus sp_null_new(const double *lambdas, uintptr_t n, struct SpNull **out);

/**
 * # Safety
 * `h` must be null or a handle from [`sp_null_new`], not yet freed.
 */
void sp_null_free(struct SpNull *h);

/**
 * Number of means in the null.
 *
 * # Safety
 * `h` must be a live handle.
 */
uintptr_t sp_null_len(const struct SpNull *h);

/**
 * Statistic of the named detector on `counts`. `model` may be null except for "lrt".
 * A statistic of `-inf` means the detector's threshold set was empty.
 *
 * # Safety
 * `h` must be live, `detector` NUL-terminated, `counts` must point to `n` values,
 * `model` null or live, `out` valid.
 */
enum SpStatus sp_null_evaluate(const struct SpNull *h,
                               const struct SpModel *model,
                               const char *detector,
                               const uint64_t *counts,
                               uintptr_t n,
                               double *out);

/**
 * Simulated critical value of a detector at level `alpha` from `null_reps` null draws.
 *
 * # Safety
 * As for [`sp_null_evaluate`].
 */
enum SpStatus sp_calibrate(const struct SpNull *h,
                           const struct SpModel *model,
                           const char *detector,
                           double alpha,
                           uintptr_t null_reps,
                           uint64_t seed,
                           double *out);

/**
 * Builds a scenario from its JSON description.
 *
 * # Safety
 * `json` must be NUL-terminated and `out` a valid handle slot.
 */
enum SpStatus sp_model_from_json(const char *json, struct SpModel **out);

/**
 * # Safety
 * `m` must be null or a handle from [`sp_model_from_json`], not yet freed.
 */
void sp_model_free(struct SpModel *m);

/**
 * # Safety
 * `m` must be a live handle.
 */
uintptr_t sp_model_len(const struct SpModel *m);

/**
 * Copies the model's null means into `out` (length `n`).
 *
 * # Safety
 * `m` must be live and `out` must hold `n` doubles.
 */
enum SpStatus sp_model_lambdas(const struct SpModel *m, double *out, uintptr_t n);

/**
 * Draws one sample from the `(seed, stream_id)` random stream into `out` (length `n`).
 *
 * # Safety
 * `m` must be live and `out` must hold `n` values.
 */
enum SpStatus sp_model_sample(const struct SpModel *m,
                              uint64_t seed,
                              uint64_t stream_id,
                              enum SpHypothesis under,
                              uint64_t *out,
                              uintptr_t n);

/**
 * Runs a power grid described by `config_json` on `workers` threads (0 = all cores)
 * and returns the CSV table in `*out_csv`.
 *
 * # Safety
 * `config_json` must be NUL-terminated and `out_csv` a valid pointer; free the
 * result with [`sp_string_free`].
 */
enum SpStatus sp_run_grid_csv(const char *config_json, uintptr_t workers, char **out_csv);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPARSEPOIS_H */
