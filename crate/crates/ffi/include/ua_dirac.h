#ifndef UA_DIRAC_H
#define UA_DIRAC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every function.
 */
typedef enum UaStatus {
  UA_STATUS_OK = 0,
  /**
   * A null pointer, an undersized buffer or an out-of-range enum value.
   */
  UA_STATUS_INVALID_ARGUMENT = 1,
  UA_STATUS_INVALID_CONFIG = 2,
  UA_STATUS_SINGULAR = 3,
  UA_STATUS_DIVERGED = 4,
  UA_STATUS_NUMERICAL = 5,
  UA_STATUS_IO = 6,
  /**
   * The library panicked; the handle involved must not be used again.
   */
  UA_STATUS_PANIC = 7,
} UaStatus;

/**
 * Opaque solver handle.
 */
typedef struct UaSolver UaSolver;

/**
 * Solver parameters. Enumerations are plain integers so that any value a
 * C caller passes is representable; out-of-range values are rejected.
 */
typedef struct UaConfig {
  /**
   * 1, 2 or 3 for Examples I, II, III.
   */
  uint32_t example;
  /**
   * 1 for UA1, 2 for UA2.
   */
  uint32_t scheme;
  /**
   * Preparation order 0..=5, or -1 to pick the largest order whose
   * prepared data stays close to the initial profile.
   */
  int32_t init_order;
  double epsilon;
  double dt;
  /**
   * Even number of spatial points, at least 4.
   */
  size_t n;
  /**
   * Even number of `tau` points, at least 2.
   */
  size_t n_tau;
  /**
   * 0 for the half-step prediction, 1 for the printed variant.
   */
  uint32_t ua2_prediction;
  /**
   * 0 for the printed `g1`, 1 for the `dx` variant.
   */
  uint32_t g1;
} UaConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Example I, UA2, automatic order, `eps = 1/4`, `dt = 1e-3`, `N = 128`,
 * `N_tau = 32`.
 */
struct UaConfig ua_config_default(void);

/**
 * Builds a solver holding the prepared initial data at `t = 0`.
 *
 * # Safety
 * `config` must point to a valid [`UaConfig`] and `out` to writable
 * storage for one pointer. On success `*out` owns a solver that must be
 * released with [`ua_solver_free`]; on failure `*out` is set to null.
 */
enum UaStatus ua_solver_new(const struct UaConfig *config, struct UaSolver **out);

/**
 * Advances the solver by `steps` time steps. On failure the solver keeps
 * the last successfully computed state.
 *
 * # Safety
 * `solver` must be a live handle from [`ua_solver_new`].
 */
enum UaStatus ua_solver_advance(struct UaSolver *solver, size_t steps);

/**
 * Current time `t_n`.
 *
 * # Safety
 * `solver` must be a live handle and `out` writable.
 */
enum UaStatus ua_solver_time(const struct UaSolver *solver, double *out);

/**
 * Number of spatial grid points `N`.
 *
 * # Safety
 * `solver` must be a live handle and `out` writable.
 */
enum UaStatus ua_solver_grid_size(const struct UaSolver *solver, size_t *out);

/**
 * Writes the `N` grid points `x_j` into `x`.
 *
 * # Safety
 * `solver` must be a live handle and `x` must point to `len` writable doubles.
 */
enum UaStatus ua_solver_grid_points(const struct UaSolver *solver, double *x, size_t len);

/**
 * Writes `Phi(t_n, x_j)` as `4 N` doubles: `re, im` of `phi_1` at every
 * node, followed by `re, im` of `phi_2`.
 *
 * # Safety
 * `solver` must be a live handle and `out` must point to `len` writable doubles.
 */
enum UaStatus ua_solver_phi(const struct UaSolver *solver, double *out, size_t len);

/**
 * Mass `||Phi(t_n)||^2` and its value at `t = 0`.
 *
 * # Safety
 * `solver` must be a live handle; `out` and `initial` must be writable
 * (`initial` may be null).
 */
enum UaStatus ua_solver_mass(const struct UaSolver *solver, double *out, double *initial);

/**
 * Energy of `Phi(t_n)`.
 *
 * # Safety
 * `solver` must be a live handle and `out` writable.
 */
enum UaStatus ua_solver_energy(const struct UaSolver *solver, double *out);

/**
 * Releases a solver. Null is accepted.
 *
 * # Safety
 * `solver` must be null or a handle from [`ua_solver_new`] not yet freed.
 */
void ua_solver_free(struct UaSolver *solver);

/**
 * Copies the calling thread's last error message, NUL-terminated and
 * truncated to fit, into `buf`. Returns the full message length excluding
 * the terminator (0 when there is no message), so a caller can size `buf`.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t ua_last_error_message(char *buf, size_t len);

/**
 * Forgets the calling thread's last error message.
 */
void ua_clear_last_error(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UA_DIRAC_H */
