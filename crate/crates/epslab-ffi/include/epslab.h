#ifndef EPSLAB_H
#define EPSLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Boundary condition of the box.
 */
typedef enum {
  EPSLAB_BC_PERIODIC = 0,
  EPSLAB_BC_DIRICHLET = 1,
} EpslabBc;

/**
 * Fixed-point operator choice.
 */
typedef enum {
  EPSLAB_MODE_EPS_SPLIT = 0,
  EPSLAB_MODE_EPS_FULL = 1,
  EPSLAB_MODE_LIMIT = 2,
} EpslabMode;

/**
 * Nonlinearity family; `nonlinearity_param` is the constant value or
 * the power-shift exponent (ignored for the exponential).
 */
typedef enum {
  EPSLAB_NONLINEARITY_CONSTANT = 0,
  EPSLAB_NONLINEARITY_POWER_SHIFT = 1,
  EPSLAB_NONLINEARITY_EXPONENTIAL = 2,
} EpslabNonlinearity;

/**
 * Potential family; `potential_param` is the constant level b^2, the
 * sine frequency omega, or the quadratic coefficient respectively.
 */
typedef enum {
  EPSLAB_POTENTIAL_CONSTANT = 0,
  EPSLAB_POTENTIAL_SHIFTED_SINE = 1,
  EPSLAB_POTENTIAL_RADIAL_QUADRATIC = 2,
} EpslabPotential;

/**
 * Status codes returned by every fallible call.
 */
typedef enum {
  EPSLAB_STATUS_OK = 0,
  EPSLAB_STATUS_NULL_POINTER = 1,
  EPSLAB_STATUS_INVALID_ARGUMENT = 2,
  EPSLAB_STATUS_NOT_CERTIFIED = 3,
  EPSLAB_STATUS_NO_CONVERGENCE = 4,
  EPSLAB_STATUS_NUMERIC_FAILURE = 5,
} EpslabStatus;

/**
 * Opaque problem handle.
 */
typedef struct EpslabProblem EpslabProblem;

/**
 * Opaque solve-report handle.
 */
typedef struct EpslabReport EpslabReport;

/**
 * Plain-data mirror of the contraction certificate.
 */
typedef struct {
  double radius;
  double a2;
  double p_norm;
  double m_r;
  double m1_r;
  double gamma;
  double ball_lhs;
  bool ball_ok;
  bool contraction_ok;
  bool certified;
} EpslabCertificate;

/**
 * Everything needed to build a problem handle. A nonpositive `radius`
 * requests a feasibility search; failing to find one is not an error
 * (check `epslab_problem_certified`).
 */
typedef struct {
  uint32_t dims;
  uint32_t n;
  double length;
  EpslabBc bc;
  double a2;
  EpslabPotential potential;
  double potential_param;
  EpslabNonlinearity nonlinearity;
  double nonlinearity_param;
  EpslabMode mode;
  double eps;
  double radius;
} EpslabProblemConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the most recent failure on this thread. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *epslab_last_error_message(void);

/**
 * Library version as a static C string.
 */
const char *epslab_version(void);

/**
 * Pointwise Yukawa kernel value at radius `r > 0`.
 */
EpslabStatus epslab_yukawa_eval(double eps, double a, bool rescaled, double r, double *out);

/**
 * Radial quadrature of the kernel mass over `[0, r_max]`; the exact
 * value is `1/a^2`.
 */
EpslabStatus epslab_kernel_mass(double eps, double a, bool rescaled, double r_max, double *out);

/**
 * Evaluates the ball and contraction conditions at radius `r`.
 */
EpslabStatus epslab_certify(double a2,
                            double p_norm,
                            EpslabNonlinearity nonlinearity,
                            double nonlinearity_param,
                            double r,
                            EpslabCertificate *out);

/**
 * Searches `[1e-3, 1e3]` for the smallest certified radius. `out_found`
 * reports whether one exists; `out_radius` is only meaningful then.
 */
EpslabStatus epslab_find_radius(double a2,
                                double p_norm,
                                EpslabNonlinearity nonlinearity,
                                double nonlinearity_param,
                                double *out_radius,
                                bool *out_found);

/**
 * Builds a problem handle from a config. The caller owns the handle and
 * must release it with `epslab_problem_free`.
 */
EpslabStatus epslab_problem_new(const EpslabProblemConfig *config, EpslabProblem **out);

/**
 * Releases a problem handle. Null is ignored.
 */
void epslab_problem_free(EpslabProblem *problem);

/**
 * Whether the handle carries a certified contraction.
 */
EpslabStatus epslab_problem_certified(const EpslabProblem *problem, bool *out);

/**
 * Copies the certificate attached to the handle, if any.
 */
EpslabStatus epslab_problem_certificate(const EpslabProblem *problem, EpslabCertificate *out);

/**
 * Number of grid nodes (the length of any solution buffer).
 */
EpslabStatus epslab_problem_num_nodes(const EpslabProblem *problem, size_t *out);

/**
 * Runs the Picard iteration from the zero field. A report handle is
 * produced even without convergence; the status says which.
 */
EpslabStatus epslab_solve(const EpslabProblem *problem,
                          double tol,
                          size_t max_iter,
                          EpslabReport **out);

/**
 * Solves the limiting equation `q(x) u = f(u)` node by node (requires a
 * certified handle). The report carries the field with no iteration
 * history.
 */
EpslabStatus epslab_solve_limit(const EpslabProblem *problem, EpslabReport **out);

/**
 * Releases a report handle. Null is ignored.
 */
void epslab_report_free(EpslabReport *report);

EpslabStatus epslab_report_converged(const EpslabReport *report, bool *out);

EpslabStatus epslab_report_iterations(const EpslabReport *report, size_t *out);

/**
 * Successive-difference norm of iteration `index` (zero-based).
 */
EpslabStatus epslab_report_residual(const EpslabReport *report, size_t index, double *out);

/**
 * Largest observed consecutive-residual ratio. `out_present` is false
 * when fewer than two residuals were recorded.
 */
EpslabStatus epslab_report_gamma_observed(const EpslabReport *report,
                                          bool *out_present,
                                          double *out_value);

/**
 * Certified bound on the distance to the true fixed point, when the
 * problem carried a certificate.
 */
EpslabStatus epslab_report_error_bound(const EpslabReport *report,
                                       bool *out_present,
                                       double *out_value);

EpslabStatus epslab_report_sup_norm(const EpslabReport *report, double *out);

/**
 * Number of values in the solution field.
 */
EpslabStatus epslab_report_solution_len(const EpslabReport *report, size_t *out);

/**
 * Copies the solution values (x-fastest node order) into `buffer`,
 * which must hold exactly `len` doubles.
 */
EpslabStatus epslab_report_copy_solution(const EpslabReport *report, double *buffer, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EPSLAB_H */
