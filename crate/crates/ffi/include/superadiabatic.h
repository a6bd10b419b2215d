#ifndef SUPERADIABATIC_H
#define SUPERADIABATIC_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SaStatus {
  SA_STATUS_OK = 0,
  SA_STATUS_NULL_POINTER = 1,
  SA_STATUS_INVALID_ARGUMENT = 2,
  SA_STATUS_TOO_FEW_SAMPLES = 3,
  SA_STATUS_OUT_OF_RANGE = 4,
  SA_STATUS_LEVEL_CROSSING = 5,
  SA_STATUS_NUMERICAL = 6,
  SA_STATUS_BUFFER_TOO_SMALL = 7,
  SA_STATUS_PANIC = 8,
} SaStatus;

/**
 * Iteration stack of a Landau-Zener sweep.
 */
typedef struct SaStack SaStack;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` as a
 * NUL-terminated string, truncating if needed. Returns the full message
 * length excluding the terminator.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t sa_last_error_message(char *buf, size_t len);

/**
 * Builds the linear sweep `Ω_R = rabi`, `Δ = chirp·(t − duration/2)` on
 * `samples` points and iterates it to order `j_max`.
 *
 * # Safety
 * `out` must be valid for writing one pointer.
 */
enum SaStatus sa_lz_stack_create(double chirp,
                                 double rabi,
                                 double duration,
                                 size_t samples,
                                 size_t j_max,
                                 struct SaStack **out);

/**
 * # Safety
 * `stack` must be null or a handle from [`sa_lz_stack_create`] not yet freed.
 */
void sa_stack_free(struct SaStack *stack);

/**
 * # Safety
 * `stack` must be a live handle and `out` valid for writing.
 */
enum SaStatus sa_stack_sample_count(const struct SaStack *stack, size_t *out);

/**
 * # Safety
 * `stack` must be a live handle and `out` valid for writing.
 */
enum SaStatus sa_stack_max_order(const struct SaStack *stack, size_t *out);

/**
 * Copies the σx, σy, σz components of `H₀^(j)` into three arrays of
 * `len` entries each; `len` must be at least the sample count.
 *
 * # Safety
 * `stack` must be a live handle; `x`, `y`, `z` valid for `len` writes.
 */
enum SaStatus sa_stack_modified_hamiltonian(const struct SaStack *stack,
                                            size_t j,
                                            double *x,
                                            double *y,
                                            double *z,
                                            size_t len);

/**
 * Final population of the first bare state after evolving `|1⟩` under
 * `H₀^(j)`.
 *
 * # Safety
 * `stack` must be a live handle and `out` valid for writing.
 */
enum SaStatus sa_stack_final_population(const struct SaStack *stack, size_t j, double *out);

/**
 * Boundary-condition check for `H₀^(j)` against `threshold`; writes 1 when
 * it holds and 0 otherwise.
 *
 * # Safety
 * `stack` must be a live handle and `passed` valid for writing.
 */
enum SaStatus sa_stack_boundary_check(const struct SaStack *stack,
                                      size_t j,
                                      double threshold,
                                      int32_t *passed);

/**
 * Controls of the invariant-based inversion pulse of length `duration`,
 * sampled on `len` points into `rabi` and `detuning`.
 *
 * # Safety
 * `rabi` and `detuning` must be valid for `len` writes.
 */
enum SaStatus sa_invariant_controls(double duration, double *rabi, double *detuning, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SUPERADIABATIC_H */
