#ifndef LATTICE_VIS_H
#define LATTICE_VIS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Which proportion to read from a simulation.
 */
typedef enum LvStat {
  /**
   * Visible steps.
   */
  LV_STAT_VISIBLE = 0,
  /**
   * Visible steps in residue class `a`.
   */
  LV_STAT_VISIBLE_RESIDUE = 1,
  /**
   * Consecutive visible pairs.
   */
  LV_STAT_PAIR = 2,
  /**
   * Consecutive visible pairs whose first step is in residue class `a`.
   */
  LV_STAT_PAIR_RESIDUE = 3,
} LvStat;

/**
 * Result code of every fallible call.
 */
typedef enum LvStatus {
  LV_STATUS_OK = 0,
  LV_STATUS_NULL_POINTER = 1,
  LV_STATUS_INVALID_UTF8 = 2,
  LV_STATUS_INVALID_ARGUMENT = 3,
  LV_STATUS_INVALID_CONFIG = 4,
  LV_STATUS_UNSUPPORTED_MODULUS = 5,
  LV_STATUS_BUDGET_EXCEEDED = 6,
  LV_STATUS_OVERFLOW = 7,
  LV_STATUS_PANIC = 8,
} LvStatus;

/**
 * Opaque walk configuration.
 */
typedef struct LvConfig LvConfig;

/**
 * Opaque result of a Monte Carlo run.
 */
typedef struct LvSimulation LvSimulation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null if none.
 *
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *lv_last_error(void);

/**
 * `1/zeta(k)` and `prod_p (1 - 2/p^k)` to absolute tolerance `tol`.
 *
 * # Safety
 * `out_inv_zeta` and `out_euler2` must be valid for writes.
 */
enum LvStatus lv_theory_constants(uint32_t k, double tol, double *out_inv_zeta, double *out_euler2);

/**
 * Limit of the visible proportion over steps `i = a (mod m)`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum LvStatus lv_delta(uint32_t k, uint64_t a, uint64_t m, double *out);

/**
 * Limit of the consecutive-pair proportion over `i = a (mod m)`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum LvStatus lv_gamma(uint32_t k, uint64_t a, uint64_t m, double *out);

/**
 * Parse and validate a walk configuration from JSON.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be valid for writes.
 */
enum LvStatus lv_config_from_json(const char *json, struct LvConfig **out);

/**
 * Single-law walk in dimension `k` with uniform directions.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum LvStatus lv_config_uniform(size_t k, uint64_t seed, struct LvConfig **out);

/**
 * Release a configuration. Null is ignored.
 *
 * # Safety
 * `cfg` must come from `lv_config_*` and not have been freed.
 */
void lv_config_free(struct LvConfig *cfg);

/**
 * Run `paths` walks of `steps` steps with residue modulus `m` on
 * `parallelism` threads.
 *
 * # Safety
 * `cfg` must be a live configuration; `out` must be valid for writes.
 */
enum LvStatus lv_simulate(const struct LvConfig *cfg,
                          uint64_t steps,
                          uint64_t paths,
                          uint64_t m,
                          size_t parallelism,
                          struct LvSimulation **out);

/**
 * Pooled proportion of `stat`; `a` selects the residue class and is
 * ignored for the total statistics.
 *
 * # Safety
 * `sim` must be a live simulation; `out` must be valid for writes.
 */
enum LvStatus lv_simulation_proportion(const struct LvSimulation *sim,
                                       enum LvStat stat,
                                       uint64_t a,
                                       double *out);

/**
 * Pooled report as CSV. Free the string with [`lv_string_free`].
 *
 * # Safety
 * `sim` must be a live simulation; `out` must be valid for writes.
 */
enum LvStatus lv_simulation_csv(const struct LvSimulation *sim, char **out);

/**
 * Release a simulation. Null is ignored.
 *
 * # Safety
 * `sim` must come from [`lv_simulate`] and not have been freed.
 */
void lv_simulation_free(struct LvSimulation *sim);

/**
 * Exact probability that step `steps` is visible, as `"num/den"`.
 * Free the string with [`lv_string_free`].
 *
 * # Safety
 * `cfg` must be a live configuration; `out` must be valid for writes.
 */
enum LvStatus lv_exact_visible_prob(const struct LvConfig *cfg, size_t steps, char **out);

/**
 * Release a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void lv_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LATTICE_VIS_H */
