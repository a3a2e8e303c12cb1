#ifndef ANNUITIZE_H
#define ANNUITIZE_H

/* Generated by cbindgen from crates/annuitize-ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Health state selector.
typedef enum AnnuitizeHealth {
  // Before the shock.
  ANNUITIZE_HEALTH_LOW = 0,
  // After the shock.
  ANNUITIZE_HEALTH_HIGH = 1,
} AnnuitizeHealth;

// Status codes returned by every fallible function.
typedef enum AnnuitizeStatus {
  ANNUITIZE_STATUS_OK = 0,
  // A required pointer argument was null.
  ANNUITIZE_STATUS_NULL_POINTER = 1,
  // An argument was out of range or malformed (including bad JSON).
  ANNUITIZE_STATUS_INVALID_ARGUMENT = 2,
  // A parameter assumption failed (see the last error for its name).
  ANNUITIZE_STATUS_ASSUMPTION_VIOLATION = 3,
  // Shock severity and intensity coincide within the guard.
  ANNUITIZE_STATUS_NEAR_DEGENERATE_SHOCK = 4,
  // Root finding, branch selection or quadrature failed.
  ANNUITIZE_STATUS_SOLVER_FAILURE = 5,
  // An internal panic was caught.
  ANNUITIZE_STATUS_PANIC = 6,
} AnnuitizeStatus;

// Opaque solution of the constant-force problem.
typedef struct AnnuitizeConstantSolution AnnuitizeConstantSolution;

// Opaque model parameters.
typedef struct AnnuitizeParams AnnuitizeParams;

// Opaque solution of the shock problem.
typedef struct AnnuitizeShockSolution AnnuitizeShockSolution;

// Summary of a policy simulation.
typedef struct AnnuitizeSimStats {
  double frac_total;
  double frac_pre_shock;
  double frac_post_shock;
  double mean_time;
  double se_frac;
  double se_time;
} AnnuitizeSimStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Description of the last failure on this thread (empty if none).
// The pointer stays valid until the next failing call on this thread.
const char *annuitize_last_error(void);

// Library version as a static NUL-terminated string.
const char *annuitize_version(void);

// Creates validated parameters from individual values.
//
// # Safety
// `out` must be valid for writing a pointer.
enum AnnuitizeStatus annuitize_params_new(double theta,
                                          double alpha,
                                          double sigma,
                                          double rho,
                                          double nu,
                                          double rho_hat,
                                          double mu_hat,
                                          double k,
                                          double mu_l,
                                          double delta,
                                          double lambda_l,
                                          struct AnnuitizeParams **out);

// Creates validated parameters from a JSON configuration document.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be valid for writing a pointer.
enum AnnuitizeStatus annuitize_params_from_json(const char *json, struct AnnuitizeParams **out);

// The reference calibration, carried at full precision.
struct AnnuitizeParams *annuitize_params_reference(void);

// Releases parameters. Null is ignored.
//
// # Safety
// `p` must be null or a handle from this library not yet freed.
void annuitize_params_free(struct AnnuitizeParams *p);

// Money's worth before and after the shock.
//
// # Safety
// `params` must be a live handle; the out-pointers must be valid for writing.
enum AnnuitizeStatus annuitize_moneys_worth(const struct AnnuitizeParams *params,
                                            double *delta_l,
                                            double *delta_h);

// Solves the shock problem.
//
// # Safety
// `params` must be a live handle; `out` must be valid for writing a pointer.
enum AnnuitizeStatus annuitize_solve_shock(const struct AnnuitizeParams *params,
                                           struct AnnuitizeShockSolution **out);

// Releases a shock solution. Null is ignored.
//
// # Safety
// `s` must be null or a handle from this library not yet freed.
void annuitize_shock_solution_free(struct AnnuitizeShockSolution *s);

// Regime tag (for example `P33ii1`), owned by the solution handle.
//
// # Safety
// `s` must be a live handle or null (which yields null).
const char *annuitize_shock_regime(const struct AnnuitizeShockSolution *s);

// Pre- and post-shock thresholds; NaN where the regime has none.
//
// # Safety
// `s` must be a live handle; the out-pointers must be valid for writing.
enum AnnuitizeStatus annuitize_shock_thresholds(const struct AnnuitizeShockSolution *s,
                                                double *x_l,
                                                double *x_h);

// Value function at wealth `x >= 0` in the given health state.
//
// # Safety
// `s` must be a live handle; `value` must be valid for writing.
enum AnnuitizeStatus annuitize_shock_eval(const struct AnnuitizeShockSolution *s,
                                          double x,
                                          enum AnnuitizeHealth health,
                                          double *value);

// Solves the constant-force problem with force `mu`.
//
// # Safety
// `params` must be a live handle; `out` must be valid for writing a pointer.
enum AnnuitizeStatus annuitize_solve_constant(const struct AnnuitizeParams *params,
                                              double mu,
                                              struct AnnuitizeConstantSolution **out);

// Releases a constant-force solution. Null is ignored.
//
// # Safety
// `s` must be null or a handle from this library not yet freed.
void annuitize_constant_solution_free(struct AnnuitizeConstantSolution *s);

// Threshold of a constant-force solution; NaN if the regime has none.
//
// # Safety
// `s` must be a live handle; `x` must be valid for writing.
enum AnnuitizeStatus annuitize_constant_threshold(const struct AnnuitizeConstantSolution *s,
                                                  double *x);

// Value of a constant-force solution at wealth `x >= 0`.
//
// # Safety
// `s` must be a live handle; `value` must be valid for writing.
enum AnnuitizeStatus annuitize_constant_eval(const struct AnnuitizeConstantSolution *s,
                                             double x,
                                             double *value);

// Simulates the optimal policy of the shock problem.
//
// # Safety
// `params` must be a live handle; `out` must be valid for writing.
enum AnnuitizeStatus annuitize_simulate_shock_policy(const struct AnnuitizeParams *params,
                                                     uint64_t n_paths,
                                                     double dt,
                                                     double horizon,
                                                     double x0,
                                                     uint64_t seed,
                                                     struct AnnuitizeSimStats *out);

// Simulated life expectancy under the two-state mortality of `params`.
//
// # Safety
// `params` must be a live handle; the out-pointers must be valid for writing.
enum AnnuitizeStatus annuitize_life_expectancy(const struct AnnuitizeParams *params,
                                               uint64_t n_sims,
                                               uint64_t seed,
                                               double *mean,
                                               double *std_error);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ANNUITIZE_H */
