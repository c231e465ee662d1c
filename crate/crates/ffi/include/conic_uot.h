#ifndef CONIC_UOT_H
#define CONIC_UOT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Density-level model selector for [`cuot_pde_integrate`].
typedef enum CuotModel {
  CUOT_MODEL_SMALL = 0,
  CUOT_MODEL_WFR = 1,
} CuotModel;

// Result code of every exported function.
typedef enum CuotStatus {
  CUOT_STATUS_OK = 0,
  CUOT_STATUS_NULL_POINTER = 1,
  CUOT_STATUS_INVALID_INPUT = 2,
  CUOT_STATUS_NOT_SYMMETRIC = 3,
  CUOT_STATUS_NOT_POSITIVE_DEFINITE = 4,
  CUOT_STATUS_SINGULAR_MATRIX = 5,
  CUOT_STATUS_NON_POSITIVE_MASS = 6,
  CUOT_STATUS_APEX_CROSSING = 7,
  CUOT_STATUS_POSITIVITY_LOSS = 8,
  CUOT_STATUS_LOST_DEFINITENESS = 9,
  CUOT_STATUS_NON_FINITE = 10,
  CUOT_STATUS_STEP_TOO_LARGE = 11,
  CUOT_STATUS_NON_CONVERGENCE = 12,
  CUOT_STATUS_CONSTRAINT_VIOLATION = 13,
  CUOT_STATUS_DIMENSION_MISMATCH = 14,
  CUOT_STATUS_BUFFER_TOO_SMALL = 15,
  CUOT_STATUS_PANIC = 16,
} CuotStatus;

// Opaque trace handle: rows of `t, m, xi, H` followed by the state.
typedef struct CuotTrace CuotTrace;

// Least-squares parabola `m(t) ≈ a t² + b t + c` through a trace.
typedef struct CuotMassFit {
  double a;
  double b;
  double c;
  double max_residual;
} CuotMassFit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the last failure on this thread, or null when the
// last call succeeded. Valid until the next call on the same thread.
const char *cuot_last_error_message(void);

// Integration step at which the last failure happened; returns 0 and
// writes the step when one is known, -1 otherwise.
int32_t cuot_last_error_step(size_t *step);

// Static, nul-terminated name of a status code.
const char *cuot_status_name(enum CuotStatus status);

// Solves `S V + V S = X` for symmetric `S`.
enum CuotStatus cuot_lyapunov_solve(size_t n, const double *v, const double *x, double *s_out);

// Point `t ∈ [0, 1]` of the Bures–Wasserstein geodesic, equal to `v` at
// `t = 0` and `u` at `t = 1`.
enum CuotStatus cuot_mccann_geodesic(size_t n,
                                     const double *u,
                                     const double *v,
                                     double t,
                                     double *w_out);

// Energy of the Gaussian cotangent state `(V, m, P, ξ)`.
enum CuotStatus cuot_gaussian_hamiltonian(size_t n,
                                          const double *v,
                                          double m,
                                          const double *p,
                                          double xi,
                                          double *h_out);

// Integrates the Gaussian geodesic for `steps` RK4 steps of size `dt`.
// Trace columns are `t, m, xi, H`, then `V` and `P` row-major.
enum CuotStatus cuot_gaussian_integrate(size_t n,
                                        const double *v,
                                        double m,
                                        const double *p,
                                        double xi,
                                        double dt,
                                        size_t steps,
                                        struct CuotTrace **trace_out);

// Initial momenta of the Gaussian geodesic joining `(Σ₀, m₀)` to
// `(Σ₁, m₁)` in unit time. `steps` and `max_iterations` of 0 select the
// library defaults. `iterations_out` may be null.
enum CuotStatus cuot_shoot_bvp(size_t n,
                               const double *sigma0,
                               double m0,
                               const double *sigma1,
                               double m1,
                               double tol,
                               size_t steps,
                               size_t max_iterations,
                               double *p0_out,
                               double *xi0_out,
                               size_t *iterations_out);

// Integrates the density-level geodesic on a periodic grid of `n` points
// and the given length. Trace columns are `t, m, xi, H`, then the density
// and the potential.
enum CuotStatus cuot_pde_integrate(size_t n,
                                   double length,
                                   const double *rho,
                                   const double *theta,
                                   enum CuotModel model,
                                   double dt,
                                   size_t steps,
                                   struct CuotTrace **trace_out);

// Squared length of the density velocity `rho_dot` in the small metric.
enum CuotStatus cuot_small_metric_eval(size_t n,
                                       double length,
                                       const double *rho,
                                       const double *rho_dot,
                                       double *value_out);

// Squared length of `rho_dot` in the metric with the Fisher–Rao term on
// the divergence-free remainder.
enum CuotStatus cuot_gdiv_metric_eval(size_t n,
                                      double length,
                                      const double *rho,
                                      const double *rho_dot,
                                      double *value_out);

// Number of rows (time samples) in a trace.
enum CuotStatus cuot_trace_rows(const struct CuotTrace *trace, size_t *rows_out);

// Number of columns in a trace.
enum CuotStatus cuot_trace_columns(const struct CuotTrace *trace, size_t *columns_out);

// Name of column `index`, owned by the trace. Null when out of range.
const char *cuot_trace_column_name(const struct CuotTrace *trace, size_t index);

// Copies the trace row-major into `buffer`, which must hold
// `rows * columns` values.
enum CuotStatus cuot_trace_copy(const struct CuotTrace *trace, double *buffer, size_t len);

// Largest relative deviation of `H` from its initial value.
enum CuotStatus cuot_trace_h_drift(const struct CuotTrace *trace, double *drift_out);

// Quadratic fit of the mass column.
enum CuotStatus cuot_trace_mass_fit(const struct CuotTrace *trace, struct CuotMassFit *fit_out);

// Releases a trace. Null is ignored.
void cuot_trace_free(struct CuotTrace *trace);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CONIC_UOT_H */
