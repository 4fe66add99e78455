#ifndef MULTIMODE_OPO_H
#define MULTIMODE_OPO_H

/* Generated with cbindgen:0.29.4 */

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MmoStatus {
  MMO_STATUS_OK = 0,
  MMO_STATUS_NULL_POINTER = 1,
  MMO_STATUS_INVALID_ARGUMENT = 2,
  MMO_STATUS_CONFIG = 3,
  MMO_STATUS_PHYSICS = 4,
  MMO_STATUS_IO = 5,
  MMO_STATUS_BUFFER_TOO_SMALL = 6,
  MMO_STATUS_PANIC = 7,
} MmoStatus;

typedef struct MmoScenario MmoScenario;

typedef struct MmoSpectrum MmoSpectrum;

typedef struct MmoSupermodes MmoSupermodes;

typedef struct MmoCavityFigures {
  double gamma;
  double finesse;
  double escape_efficiency;
  /**
   * Full width at half maximum (Hz).
   */
  double bandwidth_fwhm;
} MmoCavityFigures;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the most recent failure on this thread, or NULL.
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *mmo_last_error_message(void);

/**
 * Creates a handle holding the bundled reference scenario.
 *
 * # Safety
 * `out` must be NULL or valid for writing one pointer.
 */
enum MmoStatus mmo_scenario_default(struct MmoScenario **out);

/**
 * Loads a scenario file. Relative coefficient-file paths resolve against its directory.
 *
 * # Safety
 * `path` must be NULL or a NUL-terminated string; `out` NULL or valid for writing one pointer.
 */
enum MmoStatus mmo_scenario_load(const char *path, struct MmoScenario **out);

/**
 * # Safety
 * `handle` must be NULL or a pointer returned by a scenario constructor, not yet freed.
 */
void mmo_scenario_free(struct MmoScenario *handle);

/**
 * Replaces the pump power (mW) and revalidates the scenario.
 *
 * # Safety
 * `handle` must be NULL or a live scenario handle.
 */
enum MmoStatus mmo_scenario_set_pump_power(struct MmoScenario *handle, double power_mw);

/**
 * # Safety
 * `handle` must be NULL or a live scenario handle; `out` NULL or valid for writing.
 */
enum MmoStatus mmo_cavity_figures(const struct MmoScenario *handle, struct MmoCavityFigures *out);

/**
 * Diagonalizes the coupling matrix of the scenario's mode basis.
 *
 * # Safety
 * `handle` must be NULL or a live scenario handle; `out` NULL or valid for writing one pointer.
 */
enum MmoStatus mmo_supermodes_new(const struct MmoScenario *handle, struct MmoSupermodes **out);

/**
 * # Safety
 * `handle` must be NULL or a pointer returned by [`mmo_supermodes_new`], not yet freed.
 */
void mmo_supermodes_free(struct MmoSupermodes *handle);

/**
 * # Safety
 * `handle` must be NULL or a live supermode handle; `out` NULL or valid for writing.
 */
enum MmoStatus mmo_supermodes_len(const struct MmoSupermodes *handle, size_t *out);

/**
 * # Safety
 * `handle` must be NULL or a live supermode handle; `out` NULL or valid for writing.
 */
enum MmoStatus mmo_supermodes_eigenvalue(const struct MmoSupermodes *handle, size_t k, double *out);

/**
 * Copies the basis coefficients of supermode `k` into `buffer`, which must hold as many
 * values as there are supermodes.
 *
 * # Safety
 * `handle` must be NULL or a live supermode handle; `buffer` NULL or valid for `len` writes.
 */
enum MmoStatus mmo_supermodes_vector(const struct MmoSupermodes *handle,
                                     size_t k,
                                     double *buffer,
                                     size_t len);

/**
 * Zero-frequency squeezed variance of supermode `k` at threshold, with perfect detection.
 *
 * # Safety
 * `handle` must be NULL or a live supermode handle; `out` NULL or valid for writing.
 */
enum MmoStatus mmo_threshold_variance(const struct MmoSupermodes *handle, size_t k, double *out);

/**
 * Analytic squeezing spectrum of supermode `k` at the scenario's pump power, evaluated at
 * `count` analysis frequencies (Hz).
 *
 * # Safety
 * `handle` must be NULL or a live scenario handle; `frequencies` NULL or valid for `count`
 * reads; `out` NULL or valid for writing one pointer.
 */
enum MmoStatus mmo_spectrum_new(const struct MmoScenario *handle,
                                size_t k,
                                const double *frequencies,
                                size_t count,
                                struct MmoSpectrum **out);

/**
 * # Safety
 * `handle` must be NULL or a pointer returned by [`mmo_spectrum_new`], not yet freed.
 */
void mmo_spectrum_free(struct MmoSpectrum *handle);

/**
 * Normalized gain σ of the spectrum's supermode.
 *
 * # Safety
 * `handle` must be NULL or a live spectrum handle; `out` NULL or valid for writing.
 */
enum MmoStatus mmo_spectrum_sigma(const struct MmoSpectrum *handle, double *out);

/**
 * Copies v_min and v_max (shot-noise units); either buffer may be NULL to skip it.
 *
 * # Safety
 * `handle` must be NULL or a live spectrum handle; non-NULL buffers must be valid for `len`
 * writes.
 */
enum MmoStatus mmo_spectrum_values(const struct MmoSpectrum *handle,
                                   double *v_min,
                                   double *v_max,
                                   size_t len);

/**
 * Signal and idler wavelengths (nm) at the scenario's crystal temperature.
 *
 * # Safety
 * `handle` must be NULL or a live scenario handle; outputs NULL or valid for writing.
 */
enum MmoStatus mmo_wavelengths(const struct MmoScenario *handle,
                               double *signal_nm,
                               double *idler_nm);

/**
 * Interferometer error signal at relative phase `phi` for the scenario's lock settings.
 *
 * # Safety
 * `handle` must be NULL or a live scenario handle; `out` NULL or valid for writing.
 */
enum MmoStatus mmo_error_signal(const struct MmoScenario *handle, double phi, double *out);

/**
 * Seeded parametric intensity gain at phase `phi` for normalized gain `sigma` in [0, 1).
 *
 * # Safety
 * `out` must be NULL or valid for writing.
 */
enum MmoStatus mmo_parametric_gain(double phi, double sigma, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MULTIMODE_OPO_H */
