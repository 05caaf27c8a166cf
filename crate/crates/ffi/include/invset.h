#ifndef INVSET_H
#define INVSET_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum InvsetStatus {
  INVSET_STATUS_OK = 0,
  /**
   * A required pointer argument was NULL.
   */
  INVSET_STATUS_NULL_POINTER = 1,
  /**
   * A string argument was not UTF-8 or not a number.
   */
  INVSET_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The inputs are well-formed but outside the operation's domain.
   */
  INVSET_STATUS_DOMAIN_ERROR = 3,
  /**
   * A search budget or size limit was exceeded.
   */
  INVSET_STATUS_RESOURCE_LIMIT = 4,
  /**
   * The library panicked; the call had no effect on its outputs.
   */
  INVSET_STATUS_PANIC = 5,
} InvsetStatus;

/**
 * Finite-depth point of the Cantor set `C(p)`.
 */
typedef struct InvsetCantorPoint InvsetCantorPoint;

/**
 * Result of a CHSH run on the standard geometry.
 */
typedef struct InvsetChshReport InvsetChshReport;

/**
 * Truncated element of `Q_p`.
 */
typedef struct InvsetPadic InvsetPadic;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or `""`. The pointer stays
 * valid until the next `invset_*` call on the same thread.
 */
const char *invset_last_error(void);

/**
 * Library version as a static string.
 */
const char *invset_version(void);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void invset_string_free(char *s);

/**
 * Embeds a rational (`"a/b"`, integer or decimal) into `Q_p` with `precision`
 * unit digits.
 *
 * # Safety
 * `rational` must be a NUL-terminated string; `out` must be writable.
 */
enum InvsetStatus invset_padic_new(const char *rational,
                                   uint64_t p,
                                   size_t precision,
                                   struct InvsetPadic **out);

/**
 * # Safety
 * `x` must be NULL or a live handle from this library.
 */
void invset_padic_free(struct InvsetPadic *x);

/**
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum InvsetStatus invset_padic_add(const struct InvsetPadic *x,
                                   const struct InvsetPadic *y,
                                   struct InvsetPadic **out);

/**
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum InvsetStatus invset_padic_mul(const struct InvsetPadic *x,
                                   const struct InvsetPadic *y,
                                   struct InvsetPadic **out);

/**
 * `|x|_p` as an exact fraction string.
 *
 * # Safety
 * `x` must be live; `out` must be writable.
 */
enum InvsetStatus invset_padic_norm(const struct InvsetPadic *x, char **out);

/**
 * `|x − y|_p` as an exact fraction string.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum InvsetStatus invset_padic_distance(const struct InvsetPadic *x,
                                        const struct InvsetPadic *y,
                                        char **out);

/**
 * Valuation of a nonzero element; `DomainError` for zero.
 *
 * # Safety
 * `x` must be live; `out` must be writable.
 */
enum InvsetStatus invset_padic_valuation(const struct InvsetPadic *x, int64_t *out);

/**
 * Digit display such as `3^0 · …1112_3`.
 *
 * # Safety
 * `x` must be live; `out` must be writable.
 */
enum InvsetStatus invset_padic_to_string(const struct InvsetPadic *x, char **out);

/**
 * `F_p(x)` for a p-adic integer `x`.
 *
 * # Safety
 * `x` must be live; `out` must be writable.
 */
enum InvsetStatus invset_cantor_encode(const struct InvsetPadic *x, struct InvsetCantorPoint **out);

/**
 * # Safety
 * `pt` must be NULL or a live handle from this library.
 */
void invset_cantor_point_free(struct InvsetCantorPoint *pt);

/**
 * Exact coordinate in `[0, 1]` as a fraction string.
 *
 * # Safety
 * `pt` must be live; `out` must be writable.
 */
enum InvsetStatus invset_cantor_point_coordinate(const struct InvsetCantorPoint *pt, char **out);

/**
 * p-adic distance `D` between the preimages, as a fraction string.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum InvsetStatus invset_cantor_distance(const struct InvsetCantorPoint *a,
                                         const struct InvsetCantorPoint *b,
                                         char **out);

/**
 * Euclidean distance `E` as a fraction string.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum InvsetStatus invset_cantor_euclidean(const struct InvsetCantorPoint *a,
                                          const struct InvsetCantorPoint *b,
                                          char **out);

/**
 * Writes 0 if `point` survives to `depth`, else the 1-based level removing it.
 *
 * # Safety
 * `point` must be a NUL-terminated string; `out_level` must be writable.
 */
enum InvsetStatus invset_cantor_membership(const char *point,
                                           uint64_t p,
                                           uint32_t depth,
                                           uint32_t *out_level);

/**
 * `log p / log(2p − 1)`.
 *
 * # Safety
 * `out` must be writable.
 */
enum InvsetStatus invset_hausdorff_dimension(uint64_t p, double *out);

/**
 * Decides whether `cos_ac·cos_bc + sin·sin·cos(phase·π)` is rational. When it
 * is, `*out_value` receives the exact value (free it); otherwise NULL.
 *
 * # Safety
 * String arguments must be NUL-terminated; outputs must be writable.
 */
enum InvsetStatus invset_is_rational(const char *cos_ac,
                                     const char *cos_bc,
                                     const char *phase,
                                     bool *out_rational,
                                     char **out_value);

/**
 * Nearest `m / 2^level` to a cosine, ties toward zero.
 *
 * # Safety
 * `cosine` must be NUL-terminated; `out` must be writable.
 */
enum InvsetStatus invset_snap_cosine(const char *cosine, uint32_t level, char **out);

/**
 * Runs CHSH on the snapped standard geometry at `level`. `n_trials = 0`
 * skips Monte Carlo.
 *
 * # Safety
 * `out` must be writable.
 */
enum InvsetStatus invset_chsh_run(uint32_t level,
                                  uint64_t n_trials,
                                  uint64_t seed,
                                  bool enforce_rule,
                                  struct InvsetChshReport **out);

/**
 * # Safety
 * `r` must be NULL or a live handle from this library.
 */
void invset_chsh_report_free(struct InvsetChshReport *r);

/**
 * Exact `A′` as a fraction string.
 *
 * # Safety
 * `r` must be live; `out` must be writable.
 */
enum InvsetStatus invset_chsh_report_a_prime(const struct InvsetChshReport *r, char **out);

/**
 * Whether the joint quantity `A` was reported undefined.
 *
 * # Safety
 * `r` must be live; `out` must be writable.
 */
enum InvsetStatus invset_chsh_report_a_undefined(const struct InvsetChshReport *r, bool *out);

/**
 * Monte Carlo `A′` and its standard error; `DomainError` if the run had no trials.
 *
 * # Safety
 * `r` must be live; outputs must be writable.
 */
enum InvsetStatus invset_chsh_report_monte_carlo(const struct InvsetChshReport *r,
                                                 double *out_a_prime,
                                                 double *out_stderr);

/**
 * The full report as JSON.
 *
 * # Safety
 * `r` must be live; `out` must be writable.
 */
enum InvsetStatus invset_chsh_report_json(const struct InvsetChshReport *r, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* INVSET_H */
