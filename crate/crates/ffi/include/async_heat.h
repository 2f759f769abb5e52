#ifndef ASYNC_HEAT_H
#define ASYNC_HEAT_H

/* Generated by cbindgen from crates/ffi. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HeatStatus {
  HEAT_STATUS_OK = 0,
  HEAT_STATUS_NULL_POINTER = 1,
  /**
   * An argument lies outside the operation's domain.
   */
  HEAT_STATUS_DOMAIN = 2,
  /**
   * A precondition was violated (for example unpinned Dirichlet ends).
   */
  HEAT_STATUS_CONTRACT = 3,
  /**
   * A non-finite value appeared.
   */
  HEAT_STATUS_DIVERGED = 4,
  HEAT_STATUS_WORKER_FAILED = 5,
  HEAT_STATUS_BUFFER_TOO_SMALL = 6,
  HEAT_STATUS_PANIC = 7,
} HeatStatus;

typedef enum HeatBoundaryKind {
  HEAT_BOUNDARY_KIND_DIRICHLET = 0,
  HEAT_BOUNDARY_KIND_PERIODIC = 1,
} HeatBoundaryKind;

typedef enum HeatDelayLaw {
  HEAT_DELAY_LAW_UNIFORM = 0,
  HEAT_DELAY_LAW_FIXED = 1,
  HEAT_DELAY_LAW_TRUNCATED_GEOMETRIC = 2,
} HeatDelayLaw;

typedef enum HeatExecMode {
  HEAT_EXEC_MODE_BARRIERED = 0,
  HEAT_EXEC_MODE_BARRIER_FREE = 1,
} HeatExecMode;

/**
 * Opaque result of an ensemble run.
 */
typedef struct HeatEnsemble HeatEnsemble;

/**
 * Opaque stepping state of one (possibly asynchronous) run.
 */
typedef struct HeatSimulation HeatSimulation;

typedef struct HeatBoundary {
  enum HeatBoundaryKind kind;
  /**
   * Left and right end values; ignored for periodic boundaries.
   */
  double c1;
  double c2;
} HeatBoundary;

typedef struct HeatParams {
  double alpha;
  double dt;
  double dx;
  /**
   * Non-zero skips the `r <= 0.5` stability check.
   */
  uint8_t allow_unstable;
} HeatParams;

typedef struct HeatDelay {
  /**
   * Buffer length; 1 means no staleness.
   */
  size_t q;
  enum HeatDelayLaw law;
  /**
   * Used by `HEAT_DELAY_LAW_FIXED`.
   */
  size_t fixed_delay;
  /**
   * Used by `HEAT_DELAY_LAW_TRUNCATED_GEOMETRIC`.
   */
  double p;
  uint64_t seed;
} HeatDelay;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static description of a status code. Never null.
 */
const char *heat_status_str(enum HeatStatus status);

/**
 * Copies the calling thread's last error message (NUL-terminated, truncated
 * to `len - 1` bytes) into `buf`. Returns the full message length in bytes,
 * excluding the terminator; 0 means the last call succeeded.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t heat_last_error(char *buf, size_t len);

/**
 * `r = alpha * dt / dx^2`.
 *
 * # Safety
 * `out_r` must be valid for writes.
 */
enum HeatStatus heat_derive_r(double alpha, double dt, double dx, double *out_r);

/**
 * Writes `cos^2(3*pi/2 * i/(n-1))` for `i < n` into `out`.
 *
 * # Safety
 * `out` must point to `out_len` writable doubles.
 */
enum HeatStatus heat_cosine_init(size_t n, double *out, size_t out_len);

/**
 * Writes the linear profile from `c1` to `c2` over `n` points.
 *
 * # Safety
 * `out` must point to `out_len` writable doubles.
 */
enum HeatStatus heat_linear_steady_state(size_t n,
                                         double c1,
                                         double c2,
                                         double *out,
                                         size_t out_len);

/**
 * Overwrites the end points of `values` with the Dirichlet constants.
 * Periodic boundaries leave the array untouched.
 *
 * # Safety
 * `values` must point to `n` readable and writable doubles.
 */
enum HeatStatus heat_impose_boundary(double *values, size_t n, struct HeatBoundary bc);

/**
 * # Safety
 * `values` must point to `n` readable doubles; `out` must be valid for writes.
 */
enum HeatStatus heat_l2_norm(const double *values, size_t n, double *out);

/**
 * # Safety
 * `values` must point to `n` readable doubles; `out` must be valid for writes.
 */
enum HeatStatus heat_total_heat(const double *values, size_t n, double *out);

/**
 * Creates a run over `n` points split into PEs of `per_pe` points. A delay
 * with `q = 1` gives the synchronous scheme.
 *
 * # Safety
 * `u0` must point to `n` readable doubles and `out` must be valid for writes.
 * The handle written to `out` must be released with [`heat_simulation_free`].
 */
enum HeatStatus heat_simulation_new(const double *u0,
                                    size_t n,
                                    struct HeatParams params,
                                    struct HeatBoundary bc,
                                    size_t per_pe,
                                    struct HeatDelay delay,
                                    struct HeatSimulation **out);

/**
 * Advances the run by `steps` steps.
 *
 * # Safety
 * `sim` must be a live handle from [`heat_simulation_new`].
 */
enum HeatStatus heat_simulation_step(struct HeatSimulation *sim, size_t steps);

/**
 * Current step index, or 0 for a null handle.
 *
 * # Safety
 * `sim` must be null or a live handle.
 */
size_t heat_simulation_step_index(const struct HeatSimulation *sim);

/**
 * Number of grid points, or 0 for a null handle.
 *
 * # Safety
 * `sim` must be null or a live handle.
 */
size_t heat_simulation_len(const struct HeatSimulation *sim);

/**
 * Copies the current field into `out`.
 *
 * # Safety
 * `sim` must be a live handle and `out` must point to `out_len` writable doubles.
 */
enum HeatStatus heat_simulation_state(const struct HeatSimulation *sim,
                                      double *out,
                                      size_t out_len);

/**
 * # Safety
 * `sim` must be null or a handle from [`heat_simulation_new`] not yet freed.
 */
void heat_simulation_free(struct HeatSimulation *sim);

/**
 * Runs the threaded executor with `n / per_pe` workers and writes the final
 * field to `out` and the wall time in nanoseconds to `out_elapsed_ns`
 * (which may be null).
 *
 * # Safety
 * `u0` must point to `n` readable doubles, `out` to `out_len` writable doubles.
 */
enum HeatStatus heat_exec_run(const double *u0,
                              size_t n,
                              struct HeatParams params,
                              struct HeatBoundary bc,
                              size_t per_pe,
                              enum HeatExecMode mode,
                              size_t k_end,
                              double *out,
                              size_t out_len,
                              uint64_t *out_elapsed_ns);

/**
 * Runs `runs` asynchronous simulations with seeds `base_seed + j` (the seed
 * in `delay` is ignored), recording the 2-norm every `stride` steps.
 *
 * # Safety
 * `u0` must point to `n` readable doubles and `out` must be valid for writes.
 * The handle must be released with [`heat_ensemble_free`].
 */
enum HeatStatus heat_ensemble_run(const double *u0,
                                  size_t n,
                                  struct HeatParams params,
                                  struct HeatBoundary bc,
                                  size_t per_pe,
                                  struct HeatDelay delay,
                                  size_t k_end,
                                  size_t stride,
                                  size_t runs,
                                  uint64_t base_seed,
                                  struct HeatEnsemble **out);

/**
 * Number of runs, or 0 for a null handle.
 *
 * # Safety
 * `ens` must be null or a live handle.
 */
size_t heat_ensemble_runs(const struct HeatEnsemble *ens);

/**
 * Number of recorded steps per series, or 0 for a null handle.
 *
 * # Safety
 * `ens` must be null or a live handle.
 */
size_t heat_ensemble_series_len(const struct HeatEnsemble *ens);

/**
 * Recorded step indices (as doubles).
 *
 * # Safety
 * `ens` must be a live handle and `out` must point to `out_len` writable doubles.
 */
enum HeatStatus heat_ensemble_steps(const struct HeatEnsemble *ens, double *out, size_t out_len);

/**
 * Per-step mean of the 2-norms.
 *
 * # Safety
 * `ens` must be a live handle and `out` must point to `out_len` writable doubles.
 */
enum HeatStatus heat_ensemble_mean(const struct HeatEnsemble *ens, double *out, size_t out_len);

/**
 * Per-step standard deviation of the 2-norms.
 *
 * # Safety
 * `ens` must be a live handle and `out` must point to `out_len` writable doubles.
 */
enum HeatStatus heat_ensemble_std(const struct HeatEnsemble *ens, double *out, size_t out_len);

/**
 * 2-norm series of one run.
 *
 * # Safety
 * `ens` must be a live handle and `out` must point to `out_len` writable doubles.
 */
enum HeatStatus heat_ensemble_norms(const struct HeatEnsemble *ens,
                                    size_t run,
                                    double *out,
                                    size_t out_len);

/**
 * Terminal field of one run.
 *
 * # Safety
 * `ens` must be a live handle and `out` must point to `out_len` writable doubles.
 */
enum HeatStatus heat_ensemble_terminal(const struct HeatEnsemble *ens,
                                       size_t run,
                                       double *out,
                                       size_t out_len);

/**
 * Standard deviation across runs of the terminal mean temperature and of
 * the terminal 2-norm. Needs at least two runs.
 *
 * # Safety
 * `ens` must be a live handle; both outputs must be valid for writes.
 */
enum HeatStatus heat_ensemble_terminal_spread(const struct HeatEnsemble *ens,
                                              double *out_mean_temperature,
                                              double *out_norm2);

/**
 * # Safety
 * `ens` must be null or a handle from [`heat_ensemble_run`] not yet freed.
 */
void heat_ensemble_free(struct HeatEnsemble *ens);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ASYNC_HEAT_H */
