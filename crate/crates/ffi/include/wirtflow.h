#ifndef WIRTFLOW_H
#define WIRTFLOW_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum WfStatus {
  WF_STATUS_OK = 0,
  WF_STATUS_NULL_POINTER = 1,
  WF_STATUS_INVALID_ARGUMENT = 2,
  WF_STATUS_DIMENSION_MISMATCH = 3,
  WF_STATUS_IO = 4,
  WF_STATUS_DIVERGED = 5,
  WF_STATUS_PANIC = 6,
} WfStatus;

typedef enum WfPattern {
  WF_PATTERN_OCTANARY = 0,
  WF_PATTERN_TERNARY = 1,
} WfPattern;

/**
 * Measurement ensemble handle.
 */
typedef struct WfEnsemble WfEnsemble;

/**
 * Solver settings. A positive `constant_mu` selects a constant step;
 * otherwise `mu_τ = min(1 − exp(−τ/tau0), mu_max)`.
 */
typedef struct WfSolveOptions {
  size_t max_iterations;
  double tau0;
  double mu_max;
  double constant_mu;
  double gradient_tolerance;
} WfSolveOptions;

typedef struct WfMoments {
  double mean_re;
  double mean_im;
  double second_re;
  double second_im;
  double abs2;
  double abs4;
  double max_abs;
  bool symmetric;
  bool admissible;
} WfMoments;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failing call on this thread, or "".
 * The pointer stays valid until the next call into this library from the
 * same thread.
 */
const char *wf_last_error(void);

struct WfSolveOptions wf_solve_options_default(void);

/**
 * Samples `m` complex Gaussian sampling vectors in dimension `n`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum WfStatus wf_gaussian_ensemble_new(size_t n,
                                       size_t m,
                                       uint64_t seed,
                                       uint64_t stream,
                                       struct WfEnsemble **out);

/**
 * Samples `patterns` modulation codes of length `n`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum WfStatus wf_cdp_ensemble_new(size_t n,
                                  size_t patterns,
                                  enum WfPattern pattern,
                                  uint64_t seed,
                                  uint64_t stream,
                                  struct WfEnsemble **out);

/**
 * Loads codes from a CDPE1 file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` as for the constructors.
 */
enum WfStatus wf_cdp_ensemble_load(const char *path, struct WfEnsemble **out);

/**
 * # Safety
 * `ensemble` must be null or a handle from this library not yet freed.
 */
void wf_ensemble_free(struct WfEnsemble *ensemble);

/**
 * Signal dimension `n`, or 0 for a null handle.
 *
 * # Safety
 * `ensemble` must be null or a live handle.
 */
size_t wf_ensemble_dim(const struct WfEnsemble *ensemble);

/**
 * Number of measurements `m`, or 0 for a null handle.
 *
 * # Safety
 * `ensemble` must be null or a live handle.
 */
size_t wf_ensemble_measurements(const struct WfEnsemble *ensemble);

/**
 * `out = A z`; `z` holds `n` and `out` room for `m` complex entries.
 *
 * # Safety
 * Pointers must be valid for the stated lengths.
 */
enum WfStatus wf_forward(const struct WfEnsemble *ensemble,
                         const double *z,
                         size_t n,
                         double *out,
                         size_t m);

/**
 * `out = A^* v`; `v` holds `m` and `out` room for `n` complex entries.
 *
 * # Safety
 * Pointers must be valid for the stated lengths.
 */
enum WfStatus wf_adjoint(const struct WfEnsemble *ensemble,
                         const double *v,
                         size_t m,
                         double *out,
                         size_t n);

/**
 * `y = |A x|²` into `m` real values.
 *
 * # Safety
 * Pointers must be valid for the stated lengths.
 */
enum WfStatus wf_observe(const struct WfEnsemble *ensemble,
                         const double *x,
                         size_t n,
                         double *y,
                         size_t m);

/**
 * Spectral initialization with `power_iterations` power steps started from
 * the stream `(seed, 0)`. Writes `n` complex entries to `z_out`.
 *
 * # Safety
 * Pointers must be valid for the stated lengths.
 */
enum WfStatus wf_spectral_init(const struct WfEnsemble *ensemble,
                               const double *y,
                               size_t m,
                               size_t power_iterations,
                               uint64_t seed,
                               double *z_out,
                               size_t n);

/**
 * Runs Wirtinger Flow from `z0`; writes the final iterate to `z_out` and,
 * when `iterations_run` is non-null, the number of gradient evaluations.
 *
 * # Safety
 * Pointers must be valid for the stated lengths; `options` may be null for
 * the defaults.
 */
enum WfStatus wf_solve(const struct WfEnsemble *ensemble,
                       const double *y,
                       size_t m,
                       const double *z0,
                       size_t n,
                       const struct WfSolveOptions *options,
                       double *z_out,
                       size_t *iterations_run);

/**
 * Distance between `z` and `x` up to a global phase.
 *
 * # Safety
 * `z` and `x` must hold `n` complex entries; `out` must be writable.
 */
enum WfStatus wf_dist(const double *z, const double *x, size_t n, double *out);

/**
 * Exact moments of a built-in modulation distribution.
 *
 * # Safety
 * `out` must be writable.
 */
enum WfStatus wf_pattern_moments(enum WfPattern pattern, struct WfMoments *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WIRTFLOW_H */
