#ifndef RGQ_H
#define RGQ_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Method identifiers. In [`rgq_spin_boson_compare`] bit `1 << m` selects method `m`.
 */
typedef enum RgqMethod {
  RGQ_METHOD_EXACT = 0,
  RGQ_METHOD_TCL = 1,
  RGQ_METHOD_RWA = 2,
  RGQ_METHOD_RG = 3,
  RGQ_METHOD_TC = 4,
  RGQ_METHOD_BATH = 5,
} RgqMethod;

typedef enum RgqStatus {
  RGQ_STATUS_OK = 0,
  RGQ_STATUS_NULL_POINTER = 1,
  RGQ_STATUS_INVALID_ARGUMENT = 2,
  RGQ_STATUS_DIM_MISMATCH = 3,
  RGQ_STATUS_NOT_PSD = 4,
  RGQ_STATUS_NON_FINITE = 5,
  RGQ_STATUS_NUMERICAL_FAILURE = 6,
  RGQ_STATUS_IO = 7,
  RGQ_STATUS_PANIC = 8,
} RgqStatus;

/**
 * Opaque result of a spin-boson comparison run.
 */
typedef struct RgqComparison RgqComparison;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *rgq_last_error_message(void);

/**
 * Uhlmann fidelity of two d×d density matrices.
 *
 * # Safety
 * `rho1` and `rho2` must each point to 2·dim·dim readable doubles and `out`
 * to one writable double.
 */
enum RgqStatus rgq_fidelity(size_t dim, const double *rho1, const double *rho2, double *out);

/**
 * Excited-state amplitude u(t) of the resonant spin-boson model, with Δ and
 * α in units of λ² and t in units of 1/λ².
 *
 * # Safety
 * `re` and `im` must point to writable doubles.
 */
enum RgqStatus rgq_u_closed_form(double delta,
                                 double alpha,
                                 double lambda,
                                 double t,
                                 double *re,
                                 double *im);

/**
 * Exact, naive second-order and RG solutions of ẍ + εẋ + x = 0 at time t,
 * for initial amplitude `a_bar` and phase `theta_bar` at τ = 0.
 *
 * # Safety
 * `exact`, `naive` and `rg` must point to writable doubles.
 */
enum RgqStatus rgq_oscillator_eval(double epsilon,
                                   double a_bar,
                                   double theta_bar,
                                   double t,
                                   double *exact,
                                   double *naive,
                                   double *rg);

/**
 * Runs the selected methods from the excited state on a uniform grid
 * 0, dt, …, t_max (all in units of λ²) and stores the result in `*out`.
 * The mask must include the exact method. Free with [`rgq_comparison_free`].
 *
 * # Safety
 * `out` must point to a writable pointer.
 */
enum RgqStatus rgq_spin_boson_compare(double delta,
                                      double alpha,
                                      double lambda,
                                      double t_max,
                                      double dt,
                                      uint32_t method_mask,
                                      struct RgqComparison **out);

/**
 * Number of grid points, or 0 for NULL.
 *
 * # Safety
 * `c` must be NULL or a live handle from [`rgq_spin_boson_compare`].
 */
size_t rgq_comparison_len(const struct RgqComparison *c);

/**
 * Copies the grid, in units of λ², into `out`, which holds `len` doubles.
 *
 * # Safety
 * `c` must be a live handle and `out` must point to `len` writable doubles.
 */
enum RgqStatus rgq_comparison_times(const struct RgqComparison *c, double *out, size_t len);

/**
 * Copies the fidelity series of `method` against the exact map into `out`.
 *
 * # Safety
 * `c` must be a live handle and `out` must point to `len` writable doubles.
 */
enum RgqStatus rgq_comparison_fidelity(const struct RgqComparison *c,
                                       uint32_t method,
                                       double *out,
                                       size_t len);

/**
 * Smallest fidelity of `method` and the time (units of λ²) where it occurs.
 *
 * # Safety
 * `c` must be a live handle; `value` and `t` must point to writable doubles.
 */
enum RgqStatus rgq_comparison_min_fidelity(const struct RgqComparison *c,
                                           uint32_t method,
                                           double *value,
                                           double *t);

/**
 * Writes the comparison table as CSV to `path` (UTF-8, NUL-terminated).
 *
 * # Safety
 * `c` must be a live handle and `path` a valid C string.
 */
enum RgqStatus rgq_comparison_write_csv(const struct RgqComparison *c, const char *path);

/**
 * Releases a handle. NULL is ignored.
 *
 * # Safety
 * `c` must be NULL or a handle not yet freed.
 */
void rgq_comparison_free(struct RgqComparison *c);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RGQ_H */
