#ifndef CZSPACE_H
#define CZSPACE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Polynomial selection in oscillation profiles.
 */
typedef enum CzPolicy {
  CZ_POLICY_PER_BALL = 0,
  CZ_POLICY_FIXED_JET = 1,
} CzPolicy;

/**
 * Result codes of every fallible call.
 */
typedef enum CzStatus {
  CZ_STATUS_OK = 0,
  CZ_STATUS_NULL_POINTER = 1,
  CZ_STATUS_INVALID_ARGUMENT = 2,
  CZ_STATUS_PARSE = 3,
  CZ_STATUS_IO = 4,
  CZ_STATUS_FORMAT = 5,
  CZ_STATUS_DOMAIN = 6,
  CZ_STATUS_INSUFFICIENT_SAMPLES = 7,
  CZ_STATUS_NUMERICAL = 8,
  CZ_STATUS_INCOMPATIBLE = 9,
  CZ_STATUS_INAPPLICABLE = 10,
  CZ_STATUS_BUFFER_TOO_SMALL = 11,
  CZ_STATUS_PANIC = 12,
} CzStatus;

/**
 * Little-o verdict at a point.
 */
typedef enum CzVerdict {
  CZ_VERDICT_PASS = 0,
  CZ_VERDICT_FAIL = 1,
  CZ_VERDICT_INDETERMINATE = 2,
} CzVerdict;

/**
 * Opaque sampled-function handle.
 */
typedef struct CzSignal CzSignal;

/**
 * Opaque weight handle.
 */
typedef struct CzWeight CzWeight;

/**
 * Membership summary at one point. Quantities that are undefined (no
 * valid radius, vanishing residuals) are NaN.
 */
typedef struct CzMembership {
  double seminorm;
  /**
   * 1 when the big-O verdict holds.
   */
  int32_t verdict_big_o;
  enum CzVerdict verdict_little_o;
  double p_exponent;
  /**
   * Number of radii in the ladder.
   */
  uintptr_t radii;
} CzMembership;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next call into the library on the same thread.
 */
const char *cz_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *cz_version(void);

/**
 * Parses a weight such as `"t^0.5 * L2^0.5"`.
 *
 * # Safety
 * `expr` must be a NUL-terminated string; `out` must be writable.
 */
enum CzStatus cz_weight_parse(const char *expr, struct CzWeight **out);

/**
 * Releases a weight; null is ignored.
 *
 * # Safety
 * `w` must come from [`cz_weight_parse`] and not be used afterwards.
 */
void cz_weight_free(struct CzWeight *w);

/**
 * `phi(t)` for `t > 0`.
 *
 * # Safety
 * `w` must be a live handle; `out` must be writable.
 */
enum CzStatus cz_weight_eval(const struct CzWeight *w, double t, double *out);

/**
 * Exact lower and upper Boyd indices.
 *
 * # Safety
 * `w` must be a live handle; `lower` and `upper` must be writable.
 */
enum CzStatus cz_weight_indices(const struct CzWeight *w, double *lower, double *upper);

/**
 * Wraps `n` samples at `origin + spacing * i` as a one-dimensional signal.
 *
 * # Safety
 * `values` must point to `n` doubles; `out` must be writable.
 */
enum CzStatus cz_signal_new_1d(double origin,
                               double spacing,
                               const double *values,
                               uintptr_t n,
                               struct CzSignal **out);

/**
 * Loads a `.szf` file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum CzStatus cz_signal_load(const char *path, struct CzSignal **out);

/**
 * Writes a `.szf` file atomically.
 *
 * # Safety
 * `s` must be a live handle; `path` a NUL-terminated string.
 */
enum CzStatus cz_signal_save(const struct CzSignal *s, const char *path);

/**
 * Number of samples, or 0 for a null handle.
 *
 * # Safety
 * `s` must be null or a live handle.
 */
uintptr_t cz_signal_len(const struct CzSignal *s);

/**
 * Dimension (1 or 2), or 0 for a null handle.
 *
 * # Safety
 * `s` must be null or a live handle.
 */
uintptr_t cz_signal_dim(const struct CzSignal *s);

/**
 * Releases a signal; null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void cz_signal_free(struct CzSignal *s);

/**
 * Number of coefficients of a polynomial of `degree` in `dim` variables.
 */
uintptr_t cz_coeff_count(uintptr_t dim, uintptr_t degree);

/**
 * Best `L^p` polynomial of `degree` on the ball `B(x, r)`. Coefficients
 * are `D^a P(x) / a!` in graded order; `coeffs_len` must be at least
 * [`cz_coeff_count`]. `p` may be `INFINITY`.
 *
 * # Safety
 * `x` must point to `dim` doubles, `coeffs` to `coeffs_len` writable
 * doubles; `residual` may be null.
 */
enum CzStatus cz_best_poly(const struct CzSignal *s,
                           const double *x,
                           uintptr_t dim,
                           double r,
                           double p,
                           uintptr_t degree,
                           double *coeffs,
                           uintptr_t coeffs_len,
                           double *residual);

/**
 * Jet of `degree` at `x` by mollification, over `levels` dyadic scales
 * from `eps_max` down (`eps_max <= 0` picks the default ladder).
 *
 * # Safety
 * `x` must point to `dim` doubles, `coeffs` to `coeffs_len` writable doubles.
 */
enum CzStatus cz_extract_jet(const struct CzSignal *s,
                             const double *x,
                             uintptr_t dim,
                             uintptr_t degree,
                             double eps_max,
                             uintptr_t levels,
                             double *coeffs,
                             uintptr_t coeffs_len);

/**
 * Oscillation profile over `levels` dyadic radii and the membership
 * verdicts of `f` at `x` for weight `w`, exponent `p` and `degree`.
 *
 * # Safety
 * `x` must point to `dim` doubles; `out` must be writable.
 */
enum CzStatus cz_membership(const struct CzSignal *s,
                            const double *x,
                            uintptr_t dim,
                            const struct CzWeight *w,
                            double p,
                            uintptr_t degree,
                            enum CzPolicy policy,
                            uintptr_t levels,
                            struct CzMembership *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CZSPACE_H */
