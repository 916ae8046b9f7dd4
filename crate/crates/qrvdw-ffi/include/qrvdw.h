#ifndef QRVDW_H
#define QRVDW_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QrvdwMethod {
  QRVDW_METHOD_CLOSED_FORM = 0,
  QRVDW_METHOD_FAR_FIELD = 1,
  QRVDW_METHOD_ADIABATIC = 2,
  QRVDW_METHOD_CAUSAL = 3,
  QRVDW_METHOD_CONTOUR_ADIABATIC = 4,
  QRVDW_METHOD_STATIONARY_PV = 5,
  QRVDW_METHOD_PT1995 = 6,
  QRVDW_METHOD_QUADRATURE = 7,
} QrvdwMethod;

typedef enum QrvdwStatus {
  QRVDW_STATUS_OK = 0,
  QRVDW_STATUS_NULL_POINTER = 1,
  QRVDW_STATUS_INVALID_UTF8 = 2,
  QRVDW_STATUS_CONFIG = 3,
  QRVDW_STATUS_INVALID_SYSTEM = 4,
  /**
   * Outside the domain of the requested evaluator.
   */
  QRVDW_STATUS_DOMAIN = 5,
  QRVDW_STATUS_NON_CONVERGENCE = 6,
  QRVDW_STATUS_INVALID_ARGUMENT = 7,
  QRVDW_STATUS_PANIC = 8,
} QrvdwStatus;

/**
 * Opaque system handle.
 */
typedef struct QrvdwSystem QrvdwSystem;

typedef struct QrvdwEnergy {
  /**
   * Joules.
   */
  double value_j;
  double value_rad_s;
  /**
   * `W R⁶/U₀`.
   */
  double value_scaled;
  double error_scale;
} QrvdwEnergy;

typedef struct QrvdwRegime {
  bool quasi_resonant;
  bool linewidth_ok;
  /**
   * Largest `|Δ|/ω̄` over the B lines.
   */
  double max_delta_over_omega;
} QrvdwRegime;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parse a system description and return a new handle in `*out`.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer to
 * writable storage for one handle pointer.
 */
enum QrvdwStatus qrvdw_system_from_json(const char *json, struct QrvdwSystem **out);

/**
 * Release a handle. Null is ignored.
 *
 * # Safety
 * `sys` must come from `qrvdw_system_from_json` and not be used afterwards.
 */
void qrvdw_system_free(struct QrvdwSystem *sys);

/**
 * Move atom B to distance `r_m` (metres) along the current direction.
 *
 * # Safety
 * `sys` must be a live handle.
 */
enum QrvdwStatus qrvdw_system_set_distance(struct QrvdwSystem *sys, double r_m);

/**
 * Interaction energy at observation time `t_s` (seconds).
 *
 * # Safety
 * `sys` must be a live handle and `out` valid for one write.
 */
enum QrvdwStatus qrvdw_energy(const struct QrvdwSystem *sys,
                              enum QrvdwMethod method,
                              double t_s,
                              struct QrvdwEnergy *out);

/**
 * Excitation probability of atom B at `t_s`; single-line systems only.
 *
 * # Safety
 * `sys` must be a live handle and `out` valid for one write.
 */
enum QrvdwStatus qrvdw_excitation_probability(const struct QrvdwSystem *sys,
                                              double t_s,
                                              double *out);

/**
 * # Safety
 * `sys` must be a live handle and `out` valid for one write.
 */
enum QrvdwStatus qrvdw_regime(const struct QrvdwSystem *sys, struct QrvdwRegime *out);

/**
 * Message of the last failure on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *qrvdw_last_error_message(void);

/**
 * Static name of a status code.
 */
const char *qrvdw_status_name(enum QrvdwStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QRVDW_H */
