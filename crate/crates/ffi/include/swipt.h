#ifndef SWIPT_H
#define SWIPT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes of the C API.
 */
typedef enum SwiptStatus {
  SWIPT_STATUS_OK = 0,
  /**
   * Null pointer, bad UTF-8, wrong buffer length or option out of range.
   */
  SWIPT_STATUS_INVALID_ARGUMENT = 1,
  /**
   * Scenario text failed to parse or validate.
   */
  SWIPT_STATUS_SCHEMA = 2,
  /**
   * The rate floor exceeds the largest achievable rate.
   */
  SWIPT_STATUS_RATE_INFEASIBLE = 3,
  /**
   * A result was produced but the iteration did not converge.
   */
  SWIPT_STATUS_NOT_CONVERGED = 4,
  SWIPT_STATUS_IO = 5,
  /**
   * Any other library failure, including a caught panic.
   */
  SWIPT_STATUS_INTERNAL = 6,
} SwiptStatus;

/**
 * Selects one amplitude matrix of a result.
 */
typedef enum SwiptWaveform {
  SWIPT_WAVEFORM_POWER = 0,
  SWIPT_WAVEFORM_INFO = 1,
} SwiptWaveform;

/**
 * Optimized design and its figures of merit.
 */
typedef struct SwiptResult SwiptResult;

/**
 * Loaded scenario.
 */
typedef struct SwiptScenario SwiptScenario;

/**
 * Optimizer settings. A NaN `freeze_rho` leaves the splitting ratio free.
 */
typedef struct SwiptOptions {
  double epsilon;
  uint32_t i_max;
  /**
   * Bits per OFDM symbol.
   */
  double rate_floor;
  /**
   * Optimize the OFDM waveform alone.
   */
  bool wit_only;
  double freeze_rho;
} SwiptOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *swipt_last_error(void);

/**
 * Library defaults: ε = 1e-6, 100 iterations, no rate floor, ρ free.
 */
struct SwiptOptions swipt_options_default(void);

/**
 * The built-in reference scenario.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum SwiptStatus swipt_scenario_reference(struct SwiptScenario **out);

/**
 * Parses a scenario from TOML text.
 *
 * # Safety
 * `toml` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SwiptStatus swipt_scenario_from_toml(const char *toml, struct SwiptScenario **out);

/**
 * Reads a scenario file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SwiptStatus swipt_scenario_load(const char *path, struct SwiptScenario **out);

/**
 * # Safety
 * `scenario` must come from a `swipt_scenario_*` constructor.
 */
size_t swipt_scenario_num_tones(const struct SwiptScenario *scenario);

/**
 * # Safety
 * `scenario` must come from a `swipt_scenario_*` constructor.
 */
size_t swipt_scenario_num_antennas(const struct SwiptScenario *scenario);

/**
 * # Safety
 * `scenario` must be null or come from a `swipt_scenario_*` constructor,
 * and must not be used afterwards.
 */
void swipt_scenario_free(struct SwiptScenario *scenario);

/**
 * Largest achievable rate in bits per OFDM symbol under `opts`.
 *
 * # Safety
 * All pointers must be valid; `opts` may be null for the defaults.
 */
enum SwiptStatus swipt_max_rate(const struct SwiptScenario *scenario,
                                const struct SwiptOptions *opts,
                                double *out);

/**
 * Optimizes one design. On `Ok` and `NotConverged` a result handle is
 * written to `out`.
 *
 * # Safety
 * All pointers must be valid; `opts` may be null for the defaults.
 */
enum SwiptStatus swipt_optimize(const struct SwiptScenario *scenario,
                                const struct SwiptOptions *opts,
                                struct SwiptResult **out);

/**
 * Traces the rate-energy boundary at `len` rate floors evenly spaced on
 * `[0, R_max]`, writing rates (bits per symbol) and `z_DC` values.
 *
 * # Safety
 * `rates` and `zdc` must each hold `len` doubles; `opts` may be null.
 */
enum SwiptStatus swipt_sweep(const struct SwiptScenario *scenario,
                             const struct SwiptOptions *opts,
                             size_t len,
                             double *rates,
                             double *zdc);

/**
 * `z_DC` of the design; NaN for a null handle.
 *
 * # Safety
 * `result` must be null or come from [`swipt_optimize`].
 */
double swipt_result_zdc(const struct SwiptResult *result);

/**
 * Rate in bits per OFDM symbol; NaN for a null handle.
 *
 * # Safety
 * `result` must be null or come from [`swipt_optimize`].
 */
double swipt_result_rate(const struct SwiptResult *result);

/**
 * Power-splitting ratio; NaN for a null handle.
 *
 * # Safety
 * `result` must be null or come from [`swipt_optimize`].
 */
double swipt_result_rho(const struct SwiptResult *result);

/**
 * # Safety
 * `result` must be null or come from [`swipt_optimize`].
 */
size_t swipt_result_iterations(const struct SwiptResult *result);

/**
 * Copies an `N × M` amplitude matrix in row-major order into `buf`.
 *
 * # Safety
 * `buf` must hold `len` doubles and `result` come from [`swipt_optimize`].
 */
enum SwiptStatus swipt_result_amplitudes(const struct SwiptResult *result,
                                         enum SwiptWaveform which,
                                         double *buf,
                                         size_t len);

/**
 * # Safety
 * `result` must be null or come from [`swipt_optimize`], and must not be
 * used afterwards.
 */
void swipt_result_free(struct SwiptResult *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SWIPT_H */
