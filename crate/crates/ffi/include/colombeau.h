#ifndef COLOMBEAU_H
#define COLOMBEAU_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ColombeauStatus {
  COLOMBEAU_STATUS_OK = 0,
  COLOMBEAU_STATUS_NULL_POINTER = 1,
  COLOMBEAU_STATUS_INVALID_UTF8 = 2,
  COLOMBEAU_STATUS_CONFIG = 3,
  COLOMBEAU_STATUS_PARSE = 4,
  COLOMBEAU_STATUS_EVALUATION = 5,
  COLOMBEAU_STATUS_MOLLIFIER = 6,
  COLOMBEAU_STATUS_UNKNOWN_CHECK = 7,
  COLOMBEAU_STATUS_PANIC = 8,
} ColombeauStatus;

typedef enum ColombeauDecayKind {
  COLOMBEAU_DECAY_KIND_ORDER = 0,
  COLOMBEAU_DECAY_KIND_BEYOND_ORDER = 1,
  COLOMBEAU_DECAY_KIND_IDENTICALLY_ZERO = 2,
  COLOMBEAU_DECAY_KIND_AMBIGUOUS = 3,
} ColombeauDecayKind;

/**
 * A validated configuration together with its default mollifier.
 */
typedef struct ColombeauEnv ColombeauEnv;

/**
 * A built mollifier.
 */
typedef struct ColombeauMollifier ColombeauMollifier;

/**
 * Decay estimate of a net. `value` is the order for `Order`, the lower
 * bound for `BeyondOrder` and NaN otherwise. Missing fit data is NaN.
 */
typedef struct ColombeauEstimate {
  enum ColombeauDecayKind kind;
  double value;
  double slope;
  double residual;
  bool below_envelope;
} ColombeauEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next call on the same thread.
 */
const char *colombeau_last_error(void);

/**
 * Library version, statically allocated.
 */
const char *colombeau_version(void);

/**
 * # Safety
 * `s` must come from this library and not have been freed. Null is ignored.
 */
void colombeau_string_free(char *s);

/**
 * Build an environment from a JSON configuration; null means defaults.
 *
 * # Safety
 * `config_json` is null or a NUL-terminated string; `out_env` is writable.
 */
enum ColombeauStatus colombeau_env_new(const char *config_json, struct ColombeauEnv **out_env);

/**
 * # Safety
 * `env` is null or a handle from [`colombeau_env_new`] not yet freed.
 */
void colombeau_env_free(struct ColombeauEnv *env);

/**
 * Check ids in registry order as a JSON array.
 *
 * # Safety
 * `out_json` is writable.
 */
enum ColombeauStatus colombeau_check_ids(char **out_json);

/**
 * Run the checks selected by `filter` (`all`, ids separated by commas,
 * or a prefix ending in `*`) and return the suite report as JSON.
 * `out_pass` may be null.
 *
 * # Safety
 * `env` is a live handle, `filter` a NUL-terminated string, `out_json`
 * writable.
 */
enum ColombeauStatus colombeau_run_suite(const struct ColombeauEnv *env,
                                         const char *filter,
                                         uint32_t jobs,
                                         char **out_json,
                                         bool *out_pass);

/**
 * Estimate the decay of a net written in the valuation grammar, e.g.
 * `eps^2`, `exp(-1/eps)` or `corpus:gauss`.
 *
 * # Safety
 * `env` is a live handle, `spec` a NUL-terminated string, `out_estimate`
 * writable.
 */
enum ColombeauStatus colombeau_valuation(const struct ColombeauEnv *env,
                                         const char *spec,
                                         struct ColombeauEstimate *out_estimate);

/**
 * Build and certify a mollifier. `params_json` holds any subset of the
 * parameters (`dim`, `r_in`, `r_out`, `skew`, `fft_size`, `radius`,
 * `alpha_max`, `moment_tol`); null means defaults.
 *
 * # Safety
 * `params_json` is null or a NUL-terminated string; `out_mollifier` is
 * writable.
 */
enum ColombeauStatus colombeau_mollifier_build(const char *params_json,
                                               struct ColombeauMollifier **out_mollifier);

/**
 * # Safety
 * `m` is null or a handle from [`colombeau_mollifier_build`] not yet freed.
 */
void colombeau_mollifier_free(struct ColombeauMollifier *m);

/**
 * One-dimensional profile value `phi(x)`.
 *
 * # Safety
 * `m` is a live handle and `out_value` writable.
 */
enum ColombeauStatus colombeau_mollifier_eval(const struct ColombeauMollifier *m,
                                              double x,
                                              double *out_value);

/**
 * Certification report (mass, moments, tail and L2 data) as JSON.
 *
 * # Safety
 * `m` is a live handle and `out_json` writable.
 */
enum ColombeauStatus colombeau_mollifier_report(const struct ColombeauMollifier *m,
                                                char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COLOMBEAU_H */
