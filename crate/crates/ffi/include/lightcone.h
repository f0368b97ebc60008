#ifndef LIGHTCONE_H
#define LIGHTCONE_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LcStatus {
  LC_STATUS_OK = 0,
  LC_STATUS_NULL_POINTER = 1,
  LC_STATUS_INVALID_INPUT = 2,
  LC_STATUS_OUTSIDE_DOMAIN = 3,
  LC_STATUS_INFEASIBLE = 4,
  LC_STATUS_NUMERICAL = 5,
  LC_STATUS_BUFFER_TOO_SMALL = 6,
  LC_STATUS_PANIC = 7,
} LcStatus;

typedef enum LcVerdict {
  LC_VERDICT_BOUNDED = 0,
  LC_VERDICT_UNBOUNDED = 1,
  LC_VERDICT_CONFLICT = 2,
  LC_VERDICT_UNDETERMINED = 3,
} LcVerdict;

typedef enum LcAuditStatus {
  LC_AUDIT_STATUS_CONFIRMED = 0,
  LC_AUDIT_STATUS_EXPONENT_CONFIRMED_CONSTANT_MISMATCH = 1,
  LC_AUDIT_STATUS_MISMATCH = 2,
  LC_AUDIT_STATUS_INCONCLUSIVE = 3,
} LcAuditStatus;

/**
 * Outcome of one identity audit.
 */
typedef struct LcAudit LcAudit;

/**
 * Parameter set `(n, p, q, α, β, a, b, c)`.
 */
typedef struct LcParams LcParams;

/**
 * Norm-scaling fit.
 */
typedef struct LcScaling LcScaling;

/**
 * Schur-test witness.
 */
typedef struct LcWitness LcWitness;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static nul-terminated string.
 */
const char *lc_version(void);

/**
 * Bytes needed for the last error message including the terminator; 0 when
 * there is none.
 */
size_t lc_last_error_length(void);

/**
 * Copies the last error message into `buf`, truncating to `len - 1` bytes.
 *
 * # Safety
 * `buf` must be valid for `len` bytes.
 */
enum LcStatus lc_last_error_message(char *buf, size_t len);

/**
 * Builds a parameter set from plain-index arrays of length `n`. A null `c`
 * selects the exponent forced by the necessary equality.
 *
 * # Safety
 * Non-null arrays must hold `n` values; `out` must be writable.
 */
enum LcStatus lc_params_new(size_t n,
                            double p,
                            double q,
                            const double *alpha,
                            const double *beta,
                            const double *a,
                            const double *b,
                            const double *c,
                            struct LcParams **out_params);

/**
 * The worked `n = 2` parameter set.
 *
 * # Safety
 * `out_params` must be writable.
 */
enum LcStatus lc_params_worked(struct LcParams **out_params);

/**
 * # Safety
 * `params` must be null or a live handle.
 */
size_t lc_params_n(const struct LcParams *params);

/**
 * Copies the plain exponent `c` into `buf`.
 *
 * # Safety
 * `params` must be a live handle and `buf` valid for `len` values.
 */
enum LcStatus lc_params_c(const struct LcParams *params, double *buf, size_t len);

/**
 * # Safety
 * `params` must be null or a handle from `lc_params_*`, freed once.
 */
void lc_params_free(struct LcParams *params);

/**
 * # Safety
 * `params` must be a live handle; `verdict` must be writable.
 */
enum LcStatus lc_classify(const struct LcParams *params, enum LcVerdict *verdict);

/**
 * # Safety
 * `params` must be a live handle; `out_witness` must be writable.
 */
enum LcStatus lc_witness_new(const struct LcParams *params, struct LcWitness **out_witness);

/**
 * The chosen `t` and the admissible interval around it.
 *
 * # Safety
 * `witness` must be a live handle; outputs must be writable.
 */
enum LcStatus lc_witness_t(const struct LcWitness *witness,
                           double *t,
                           double *lower,
                           double *upper);

/**
 * Plain `r` and `l` of the witness.
 *
 * # Safety
 * `witness` must be a live handle; buffers valid for `len` values.
 */
enum LcStatus lc_witness_exponents(const struct LcWitness *witness,
                                   double *r,
                                   double *l,
                                   size_t len);

/**
 * 1 when both algebraic witness identities hold, 0 otherwise or on null.
 *
 * # Safety
 * `witness` must be null or a live handle.
 */
int32_t lc_witness_identities_hold(const struct LcWitness *witness);

/**
 * # Safety
 * `witness` must be null or a handle from `lc_witness_new`, freed once.
 */
void lc_witness_free(struct LcWitness *witness);

/**
 * Closed form of `∫_T Δ^l(Im w) |P^{-r}(z - w̄)| dw` at `z = x + iy` with
 * shifted `l`, `r` of length `n`; `x` and `y` hold `2n - 1` coordinates each.
 * `stated` uses the displayed constant and exponents, `corrected` the
 * derived ones.
 *
 * # Safety
 * Arrays must have the given lengths; outputs must be writable.
 */
enum LcStatus lc_tube_abs_closed(size_t n,
                                 const double *l,
                                 const double *r,
                                 const double *x,
                                 const double *y,
                                 double *stated,
                                 double *corrected);

/**
 * Audits one identity case given as JSON (the `IdentityCase` layout of the
 * audit report).
 *
 * # Safety
 * `case_json` must be a nul-terminated string; `out_audit` writable.
 */
enum LcStatus lc_audit_case_json(const char *case_json,
                                 uint64_t budget,
                                 uint64_t seed,
                                 struct LcAudit **out_audit);

/**
 * # Safety
 * `audit` must be a live handle; outputs must be writable.
 */
enum LcStatus lc_audit_status(const struct LcAudit *audit,
                              enum LcAuditStatus *status,
                              double *z_score);

/**
 * Numerical left-hand side with its standard error, and the closed form.
 *
 * # Safety
 * `audit` must be a live handle; outputs must be writable.
 */
enum LcStatus lc_audit_values(const struct LcAudit *audit,
                              double *lhs_re,
                              double *lhs_im,
                              double *lhs_stderr,
                              double *rhs_re,
                              double *rhs_im);

/**
 * # Safety
 * `audit` must be null or a handle from `lc_audit_case_json`, freed once.
 */
void lc_audit_free(struct LcAudit *audit);

/**
 * Fits the norm-scaling slopes of `f_R` and `T f_R` over the radius grid.
 * `l` and `r` are shifted and of length `n`.
 *
 * # Safety
 * Arrays must have the given lengths; `out_scaling` writable.
 */
enum LcStatus lc_scaling_new(const struct LcParams *params,
                             const double *l,
                             const double *r,
                             const double *grid,
                             size_t grid_len,
                             uint64_t budget,
                             uint64_t seed,
                             struct LcScaling **out_scaling);

/**
 * Fitted `T f_R` minus `f_R` slope in coordinate `j` (zero-based).
 *
 * # Safety
 * `scaling` must be a live handle; outputs must be writable.
 */
enum LcStatus lc_scaling_difference(const struct LcScaling *scaling,
                                    size_t j,
                                    double *value,
                                    double *std_error,
                                    int32_t *vanishes);

/**
 * # Safety
 * `scaling` must be null or a handle from `lc_scaling_new`, freed once.
 */
void lc_scaling_free(struct LcScaling *scaling);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LIGHTCONE_H */
