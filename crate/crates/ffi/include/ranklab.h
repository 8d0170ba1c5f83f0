#ifndef RANKLAB_H
#define RANKLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RlStatus {
  RL_STATUS_OK = 0,
  RL_STATUS_NULL_POINTER = 1,
  RL_STATUS_INVALID_UTF8 = 2,
  RL_STATUS_PARSE = 3,
  RL_STATUS_INVALID_ARGUMENT = 4,
  RL_STATUS_BUDGET_EXCEEDED = 5,
  RL_STATUS_INTERNAL = 6,
  RL_STATUS_PANIC = 7,
} RlStatus;

typedef enum RlTensorRank {
  RL_TENSOR_RANK_MATRIX = 0,
  RL_TENSOR_RANK_ANALYTIC = 1,
  RL_TENSOR_RANK_SLICE = 2,
  RL_TENSOR_RANK_PARTITION = 3,
  RL_TENSOR_RANK_TENSOR = 4,
} RlTensorRank;

typedef enum RlPolyRank {
  RL_POLY_RANK_ANALYTIC_D = 0,
  RL_POLY_RANK_SCHMIDT = 1,
  RL_POLY_RANK_DEGREE = 2,
  RL_POLY_RANK_GOWERS = 3,
} RlPolyRank;

/**
 * Opaque polynomial map handle.
 */
typedef struct RlPolyMap RlPolyMap;

/**
 * Opaque tensor handle.
 */
typedef struct RlTensor RlTensor;

/**
 * A rank as a certified interval; `exact` when `lower == upper` is proved.
 */
typedef struct RlRank {
  double lower;
  double upper;
  bool exact;
} RlRank;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failure on this thread; empty if none. Valid until
 * the next failing call on the same thread.
 */
const char *rl_last_error_message(void);

/**
 * Parses a `tensor v1` text.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a writable pointer.
 */
enum RlStatus rl_tensor_parse(const char *text, struct RlTensor **out);

/**
 * Builds a tensor over GF(`q`) from row-major `entries` (last axis fastest).
 *
 * # Safety
 * `dims` must point to `order` values, `entries` to `len` bytes, and `out`
 * must be writable.
 */
enum RlStatus rl_tensor_new(uint32_t q,
                            const size_t *dims,
                            size_t order,
                            const uint8_t *entries,
                            size_t len,
                            struct RlTensor **out);

/**
 * # Safety
 * `t` must come from this library and not have been freed.
 */
void rl_tensor_free(struct RlTensor *t);

/**
 * Serializes a tensor; release the result with [`rl_string_free`].
 *
 * # Safety
 * `t` must be a live handle and `out` writable.
 */
enum RlStatus rl_tensor_to_string(const struct RlTensor *t, char **out);

/**
 * A rank of a tensor. `budget = 0` selects the default budget.
 *
 * # Safety
 * `t` must be a live handle and `out` writable.
 */
enum RlStatus rl_tensor_rank(const struct RlTensor *t,
                             enum RlTensorRank which,
                             uint64_t budget,
                             struct RlRank *out);

/**
 * Parses a `poly v1` text.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a writable pointer.
 */
enum RlStatus rl_poly_parse(const char *text, struct RlPolyMap **out);

/**
 * # Safety
 * `p` must come from this library and not have been freed.
 */
void rl_poly_free(struct RlPolyMap *p);

/**
 * Serializes a polynomial map; release the result with [`rl_string_free`].
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum RlStatus rl_poly_to_string(const struct RlPolyMap *p, char **out);

/**
 * A rank of a polynomial map. `d_prime` is used by the degree rank only.
 *
 * # Safety
 * `p` must be a live handle and `out` writable.
 */
enum RlStatus rl_poly_rank(const struct RlPolyMap *p,
                           enum RlPolyRank which,
                           size_t d_prime,
                           uint64_t budget,
                           struct RlRank *out);

/**
 * `(C, κ)` of the tensor restriction bound and `c(σ, d)`. Any output
 * pointer may be null.
 *
 * # Safety
 * Non-null output pointers must be writable.
 */
enum RlStatus rl_constants(double sigma,
                           uint32_t d,
                           double *c_out,
                           double *kappa_out,
                           double *c_sigma_d_out);

/**
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void rl_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RANKLAB_H */
