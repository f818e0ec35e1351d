#pragma once

/* Generated with cbindgen:0.27.0 */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Boundary-condition selector for the eigenvalue solver.
 */
typedef enum {
  OBATA_BC_DIRICHLET = 0,
  OBATA_BC_NEUMANN = 1,
  OBATA_BC_ROBIN = 2,
} ObataBc;

/**
 * Status codes returned by every fallible call.
 */
typedef enum {
  OBATA_STATUS_OK = 0,
  OBATA_STATUS_NULL_POINTER = 1,
  OBATA_STATUS_INVALID_ARGUMENT = 2,
  OBATA_STATUS_NOT_ON_BOUNDARY = 3,
  OBATA_STATUS_NUMERICAL_FAILURE = 4,
  OBATA_STATUS_BUFFER_TOO_SMALL = 5,
} ObataStatus;

/**
 * Opaque model-domain handle.
 */
typedef struct ObataDomain ObataDomain;

/**
 * Opaque eigenvalue-result handle.
 */
typedef struct ObataEigen ObataEigen;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * ABI version of this header; bumped on breaking changes.
 */
uint32_t obata_abi_version(void);

/**
 * Static, NUL-terminated name of a status code.
 */
const char *obata_status_name(ObataStatus status);

/**
 * Creates a model domain D^m(θ) (core = 1) or its complement (core = 0)
 * in Sⁿ, carrying the canonical height solution with amplitude 1.
 *
 * # Safety
 * `out` must be a valid pointer; the returned handle must be released
 * with `obata_domain_free`.
 */
ObataStatus obata_domain_new(uintptr_t n,
                             uintptr_t m,
                             double theta,
                             int32_t core,
                             ObataDomain **out);

/**
 * Releases a domain handle.
 *
 * # Safety
 * `handle` must come from `obata_domain_new` and not be freed twice.
 */
void obata_domain_free(ObataDomain *handle);

/**
 * Closed-set membership of an ambient point (length n+1).
 *
 * # Safety
 * `handle`, `y` (length `len`) and `out` must be valid pointers.
 */
ObataStatus obata_domain_contains(const ObataDomain *handle,
                                  const double *y,
                                  uintptr_t len,
                                  int32_t *out);

/**
 * Robin residual ∂f/∂ν + a·f of the canonical height solution at a
 * boundary point.
 *
 * # Safety
 * `handle`, `y` (length `len`) and `out` must be valid pointers.
 */
ObataStatus obata_domain_robin_residual(const ObataDomain *handle,
                                        const double *y,
                                        uintptr_t len,
                                        double a,
                                        double *out);

/**
 * Time for the normalized gradient flow from a boundary point of the cap
 * complement Sⁿ∖D^{n−1}(θ) to reach the interior maximum (π/2 − θ for
 * the model).
 *
 * # Safety
 * `y` (length `len`) and `out` must be valid pointers.
 */
ObataStatus obata_cap_hit_time(uintptr_t n,
                               double theta,
                               const double *y,
                               uintptr_t len,
                               double dt,
                               double *out);

/**
 * Solves the reduced radial eigenproblem on the cap of the given radius.
 * `a` is only read for the Robin condition.
 *
 * # Safety
 * `out` must be a valid pointer; release the handle with
 * `obata_eigen_free`.
 */
ObataStatus obata_eigen_solve(uintptr_t n,
                              double radius,
                              uintptr_t ell,
                              ObataBc bc,
                              double a,
                              ObataEigen **out);

/**
 * Releases an eigenvalue handle.
 *
 * # Safety
 * `handle` must come from `obata_eigen_solve` and not be freed twice.
 */
void obata_eigen_free(ObataEigen *handle);

/**
 * Smallest eigenvalue of a solved problem.
 *
 * # Safety
 * `handle` must be a live handle from `obata_eigen_solve`.
 */
double obata_eigen_value(const ObataEigen *handle);

/**
 * Boundary-condition residual of the returned eigenfunction.
 *
 * # Safety
 * `handle` must be a live handle from `obata_eigen_solve`.
 */
double obata_eigen_bc_residual(const ObataEigen *handle);

/**
 * Sup-norm ODE residual of the returned eigenfunction.
 *
 * # Safety
 * `handle` must be a live handle from `obata_eigen_solve`.
 */
double obata_eigen_ode_residual(const ObataEigen *handle);

/**
 * Number of (r, u) samples held by the handle.
 *
 * # Safety
 * `handle` must be a live handle from `obata_eigen_solve`.
 */
uintptr_t obata_eigen_sample_count(const ObataEigen *handle);

/**
 * Copies the eigenfunction samples into caller-provided buffers of
 * capacity `cap` each.
 *
 * # Safety
 * `handle`, `r_out` and `u_out` must be valid; the buffers must have room
 * for `cap` doubles each.
 */
ObataStatus obata_eigen_samples(const ObataEigen *handle,
                                double *r_out,
                                double *u_out,
                                uintptr_t cap);

/**
 * The flow-value law L·sin(α + t).
 */
double obata_flow_value(double alpha, double t, double l);

/**
 * The warp factor cos²(α+t)/cos²α; NaN when cos α vanishes.
 */
double obata_metric_warp(double alpha, double t);

/**
 * Plateau value of the radial graph-equation profile for a < 0 (π − θ),
 * written to `out` after an actual solve.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
ObataStatus obata_phi_plateau(double a, double rho_max, double h, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus
