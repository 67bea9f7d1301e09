#ifndef IVERSON_H
#define IVERSON_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum IversonStatus {
  IVERSON_STATUS_OK = 0,
  IVERSON_STATUS_NULL_POINTER = 1,
  IVERSON_STATUS_INVALID_UTF8 = 2,
  IVERSON_STATUS_CONFIG = 3,
  IVERSON_STATUS_DOMAIN = 4,
  IVERSON_STATUS_RANGE = 5,
  IVERSON_STATUS_PARAM = 6,
  IVERSON_STATUS_NOT_INVERTIBLE = 7,
  IVERSON_STATUS_EXCLUDED = 8,
  IVERSON_STATUS_IO = 9,
  IVERSON_STATUS_OTHER = 10,
  IVERSON_STATUS_PANIC = 11,
} IversonStatus;

/**
 * A map `η(λ, s)`.
 */
typedef struct IversonEta IversonEta;

/**
 * A sensitivity family `ξ_s(x)`.
 */
typedef struct IversonFamily IversonFamily;

/**
 * A map `γ(λ, s)`.
 */
typedef struct IversonGamma IversonGamma;

/**
 * Samples of `x`, `λ` and `s`.
 */
typedef struct IversonGrid IversonGrid;

/**
 * A strictly monotone scale function.
 */
typedef struct IversonScale IversonScale;

/**
 * Summary of a residual sweep.
 */
typedef struct IversonReport {
  double max_abs;
  double mean_abs;
  double worst_point[3];
  size_t evaluated;
  size_t excluded;
  double tolerance;
  bool pass;
} IversonReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *iverson_last_error(void);

/**
 * Static NUL-terminated version string.
 */
const char *iverson_version(void);

/**
 * Releases a handle; NULL is ignored.
 *
 * # Safety
 * `handle` must come from the matching constructor and not be used afterwards.
 */
void iverson_family_free(struct IversonFamily *handle);

/**
 * Releases a handle; NULL is ignored.
 *
 * # Safety
 * `handle` must come from the matching constructor and not be used afterwards.
 */
void iverson_scale_free(struct IversonScale *handle);

/**
 * Releases a handle; NULL is ignored.
 *
 * # Safety
 * `handle` must come from the matching constructor and not be used afterwards.
 */
void iverson_eta_free(struct IversonEta *handle);

/**
 * Releases a handle; NULL is ignored.
 *
 * # Safety
 * `handle` must come from the matching constructor and not be used afterwards.
 */
void iverson_gamma_free(struct IversonGamma *handle);

/**
 * Releases a handle; NULL is ignored.
 *
 * # Safety
 * `handle` must come from the matching constructor and not be used afterwards.
 */
void iverson_grid_free(struct IversonGrid *handle);

/**
 * Builds a family from a TOML spec such as `kind = "fech_exp"\nrho_bar = 1`.
 *
 * # Safety
 * `spec_toml` must be a NUL-terminated string; `out` must be writable.
 */
enum IversonStatus iverson_family_new(const char *spec_toml, struct IversonFamily **out);

/**
 * `ξ_s(x)`
 *
 * # Safety
 * `family` must be a live handle; `out` must be writable.
 */
enum IversonStatus iverson_family_eval(const struct IversonFamily *family,
                                       double x,
                                       double s,
                                       double *out);

/**
 * Builds a scale from a TOML spec such as `kind = "log"\na = 1`.
 *
 * # Safety
 * `spec_toml` must be a NUL-terminated string; `out` must be writable.
 */
enum IversonStatus iverson_scale_new(const char *spec_toml, struct IversonScale **out);

/**
 * # Safety
 * `scale` must be a live handle; `out` must be writable.
 */
enum IversonStatus iverson_scale_eval(const struct IversonScale *scale, double x, double *out);

/**
 * # Safety
 * `scale` must be a live handle; `out` must be writable.
 */
enum IversonStatus iverson_scale_invert(const struct IversonScale *scale, double y, double *out);

/**
 * # Safety
 * `spec_toml` must be a NUL-terminated string; `out` must be writable.
 */
enum IversonStatus iverson_eta_new(const char *spec_toml, struct IversonEta **out);

/**
 * `η(λ, s)`
 *
 * # Safety
 * `eta` must be a live handle; `out` must be writable.
 */
enum IversonStatus iverson_eta_eval(const struct IversonEta *eta,
                                    double lambda,
                                    double s,
                                    double *out);

/**
 * # Safety
 * `spec_toml` must be a NUL-terminated string; `out` must be writable.
 */
enum IversonStatus iverson_gamma_new(const char *spec_toml, struct IversonGamma **out);

/**
 * `γ(λ, s)`
 *
 * # Safety
 * `gamma` must be a live handle; `out` must be writable.
 */
enum IversonStatus iverson_gamma_eval(const struct IversonGamma *gamma,
                                      double lambda,
                                      double s,
                                      double *out);

/**
 * Grid from ascending samples; `λx` must stay within the hull of `x`.
 *
 * # Safety
 * Each array must hold the stated number of doubles; `out` must be writable.
 */
enum IversonStatus iverson_grid_new(const double *x,
                                    size_t nx,
                                    const double *lambda,
                                    size_t nl,
                                    const double *s,
                                    size_t ns,
                                    struct IversonGrid **out);

/**
 * Residual of `ξ_s(λx) = γ(λ,s)·ξ_η(λ,s)(x)` over the grid.
 *
 * # Safety
 * All handles must be live; `out` must be writable.
 */
enum IversonStatus iverson_similarity_residual(const struct IversonFamily *family,
                                               const struct IversonGamma *gamma,
                                               const struct IversonEta *eta,
                                               const struct IversonGrid *grid,
                                               double tol,
                                               struct IversonReport *out);

/**
 * Runs a TOML config file as the command-line tool would, writing the
 * report into `out_dir`; `exit_status` receives 0 when every check passes
 * and 1 otherwise.
 *
 * # Safety
 * Both paths must be NUL-terminated strings; `exit_status` must be writable.
 */
enum IversonStatus iverson_run_config(const char *config_path,
                                      const char *out_dir,
                                      int *exit_status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IVERSON_H */
