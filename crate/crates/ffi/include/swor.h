#ifndef SWOR_H
#define SWOR_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum SworStatus {
  SWOR_STATUS_OK = 0,
  SWOR_STATUS_NULL_POINTER = 1,
  SWOR_STATUS_INVALID_ARGUMENT = 2,
  SWOR_STATUS_INVALID_PROBABILITIES = 3,
  SWOR_STATUS_INFEASIBLE = 4,
  SWOR_STATUS_DOMAIN = 5,
  SWOR_STATUS_PRECONDITION = 6,
  SWOR_STATUS_BUFFER_TOO_SMALL = 7,
  SWOR_STATUS_NUMERICAL = 8,
  SWOR_STATUS_PANIC = 99,
} SworStatus;

/**
 * PSD verdicts, mirroring the library.
 */
typedef enum SworVerdict {
  SWOR_VERDICT_PSD = 0,
  SWOR_VERDICT_INDEFINITE = 1,
  SWOR_VERDICT_INCONCLUSIVE = 2,
} SworVerdict;

/**
 * A feasible affine design (opaque).
 */
typedef struct SworDesign SworDesign;

/**
 * A stratified rejection sampler (opaque).
 */
typedef struct SworSampler SworSampler;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Returns the message for the last failure on this thread, or NULL.
 */
const char *swor_last_error_message(void);

/**
 * Static, NUL-terminated name of a status code.
 */
const char *swor_status_name(enum SworStatus status);

/**
 * Writes 1 to `out` if a design with sample size `n` exists for
 * `p_i = num[i] / den[i]`, 0 otherwise.
 *
 * # Safety
 * `num` and `den` must point to `len` values; `out` must be writable.
 */
enum SworStatus swor_feasible(const int64_t *num,
                              const int64_t *den,
                              size_t len,
                              size_t n,
                              int32_t *out);

/**
 * Creates the design for `p_i = num[i] / den[i]` and sample size `n`.
 *
 * # Safety
 * `num` and `den` must point to `len` values; `out` must be writable.
 */
enum SworStatus swor_design_new(const int64_t *num,
                                const int64_t *den,
                                size_t len,
                                size_t n,
                                struct SworDesign **out);

/**
 * # Safety
 * `design` must be NULL or a handle from `swor_design_new` not yet freed.
 */
void swor_design_free(struct SworDesign *design);

/**
 * Population size `N`, or 0 for NULL.
 *
 * # Safety
 * `design` must be NULL or a live handle.
 */
size_t swor_design_population_size(const struct SworDesign *design);

/**
 * Sample size `n`, or 0 for NULL.
 *
 * # Safety
 * `design` must be NULL or a live handle.
 */
size_t swor_design_sample_size(const struct SworDesign *design);

/**
 * Probability of the ordered draw `labels[0..len]`; `len` must equal `n`.
 *
 * # Safety
 * `design` must be a live handle, `labels` must point to `len` values and
 * `out` must be writable.
 */
enum SworStatus swor_design_joint_pmf(const struct SworDesign *design,
                                      const size_t *labels,
                                      size_t len,
                                      double *out);

/**
 * Exact joint probability as `num_out / den_out`; fails with
 * `SWOR_STATUS_DOMAIN` if either part does not fit in 64 bits.
 *
 * # Safety
 * As for `swor_design_joint_pmf`; `num_out` and `den_out` must be writable.
 */
enum SworStatus swor_design_joint_pmf_exact(const struct SworDesign *design,
                                            const size_t *labels,
                                            size_t len,
                                            int64_t *num_out,
                                            int64_t *den_out);

/**
 * `P[I_i = u, I_j = v]` for any two draw positions `i != j`.
 *
 * # Safety
 * `design` must be a live handle and `out` writable.
 */
enum SworStatus swor_design_bivariate(const struct SworDesign *design,
                                      size_t u,
                                      size_t v,
                                      double *out);

/**
 * HT estimator variances for attribute values `x[0..len]`, with and
 * without replacement.
 *
 * # Safety
 * `design` must be a live handle, `x` must point to `len` values and both
 * outputs must be writable.
 */
enum SworStatus swor_design_variances(const struct SworDesign *design,
                                      const double *x,
                                      size_t len,
                                      double *with_out,
                                      double *without_out);

/**
 * Smallest eigenvalue of Ψ (or Γ when a weight is zero) and the PSD verdict
 * at relative tolerance `tol`.
 *
 * # Safety
 * `design` must be a live handle; outputs must be writable.
 */
enum SworStatus swor_design_psd(const struct SworDesign *design,
                                double tol,
                                double *min_eigenvalue,
                                enum SworVerdict *verdict);

/**
 * Creates a sampler for `k` strata: stratum `j` has `sizes[j]` members, each
 * with probability `num[j] / den[j]`.
 *
 * # Safety
 * `num`, `den` and `sizes` must point to `k` values; `out` must be writable.
 */
enum SworStatus swor_sampler_new(const int64_t *num,
                                 const int64_t *den,
                                 const size_t *sizes,
                                 size_t k,
                                 size_t n,
                                 uint64_t seed,
                                 struct SworSampler **out);

/**
 * # Safety
 * `sampler` must be NULL or a handle from `swor_sampler_new` not yet freed.
 */
void swor_sampler_free(struct SworSampler *sampler);

/**
 * Draws one ordered sample of `n` distinct labels into `labels[0..cap]`.
 *
 * # Safety
 * `sampler` must be a live handle and `labels` must have room for `cap`
 * values.
 */
enum SworStatus swor_sampler_draw(struct SworSampler *sampler, size_t *labels, size_t cap);

/**
 * Accepted draws, total proposals and the bound `C` so far.
 *
 * # Safety
 * `sampler` must be a live handle; outputs must be writable.
 */
enum SworStatus swor_sampler_stats(const struct SworSampler *sampler,
                                   uint64_t *accepted,
                                   uint64_t *proposals,
                                   double *bound_c);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SWOR_H */
