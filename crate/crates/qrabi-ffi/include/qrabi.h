#ifndef QRABI_H
#define QRABI_H

/* Generated by cbindgen from the qrabi-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible entry point.
 */
typedef enum QrabiStatus {
  /**
   * The call succeeded.
   */
  QRABI_STATUS_OK = 0,
  /**
   * A parameter was rejected; see `qrabi_last_error`.
   */
  QRABI_STATUS_INVALID_INPUT = 1,
  /**
   * An iterative solve failed to converge; see `qrabi_last_error`.
   */
  QRABI_STATUS_NON_CONVERGENCE = 2,
  /**
   * A required pointer argument was null.
   */
  QRABI_STATUS_NULL_POINTER = 3,
  /**
   * An internal panic was caught at the boundary.
   */
  QRABI_STATUS_PANIC = 4,
} QrabiStatus;

/**
 * How the displacement parameter λ is chosen.
 */
typedef enum QrabiLambdaStrategy {
  /**
   * λ = g/ω, the conventional fixed displacement.
   */
  QRABI_LAMBDA_STRATEGY_GRWA_FIXED = 0,
  /**
   * λ = g/(ω + Ω), the closed-form variational choice.
   */
  QRABI_LAMBDA_STRATEGY_CLOSED_FORM = 1,
  /**
   * One self-consistent refinement of the closed form.
   */
  QRABI_LAMBDA_STRATEGY_SELF_CONSISTENT = 2,
  /**
   * The exact variational root, found by bisection.
   */
  QRABI_LAMBDA_STRATEGY_EXACT_ROOT = 3,
} QrabiLambdaStrategy;

/**
 * Opaque handle for one model configuration (ω, Ω, g).
 */
typedef struct QrabiModel QrabiModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Create a model handle for oscillator frequency `omega`, level splitting
 * `splitting`, and coupling `coupling`; writes the handle to `out`.
 *
 * # Safety
 *
 * `out` must point to writable storage for one pointer. A returned handle
 * must be released with [`qrabi_model_free`].
 */
enum QrabiStatus qrabi_model_new(double omega,
                                 double splitting,
                                 double coupling,
                                 struct QrabiModel **out);

/**
 * Release a model handle; a null handle is ignored.
 *
 * # Safety
 *
 * `model` must be null or a handle from [`qrabi_model_new`] that has not
 * been freed already.
 */
void qrabi_model_free(struct QrabiModel *model);

/**
 * Displacement parameter λ for the given strategy, written to `out`.
 *
 * # Safety
 *
 * `model` must be a live handle; `out` must point to one writable double.
 */
enum QrabiStatus qrabi_lambda(const struct QrabiModel *model,
                              enum QrabiLambdaStrategy strategy,
                              double *out);

/**
 * The `count` lowest approximate energies for the given λ strategy,
 * written ascending to `out[0..count]`.
 *
 * # Safety
 *
 * `model` must be a live handle; `out` must point to `count` writable
 * doubles.
 */
enum QrabiStatus qrabi_spectrum(const struct QrabiModel *model,
                                enum QrabiLambdaStrategy strategy,
                                size_t count,
                                double *out);

/**
 * The approximate ground-state energy for the given λ strategy.
 *
 * # Safety
 *
 * `model` must be a live handle; `out` must point to one writable double.
 */
enum QrabiStatus qrabi_ground_energy(const struct QrabiModel *model,
                                     enum QrabiLambdaStrategy strategy,
                                     double *out);

/**
 * The `count` lowest exact energies at Fock truncation `n_max`, written
 * ascending to `out[0..count]`.
 *
 * # Safety
 *
 * `model` must be a live handle; `out` must point to `count` writable
 * doubles.
 */
enum QrabiStatus qrabi_exact_spectrum(const struct QrabiModel *model,
                                      size_t n_max,
                                      size_t count,
                                      double *out);

/**
 * Approximate ground-state mean photon number for the given λ strategy.
 *
 * # Safety
 *
 * `model` must be a live handle; `out` must point to one writable double.
 */
enum QrabiStatus qrabi_mean_photon_ground(const struct QrabiModel *model,
                                          enum QrabiLambdaStrategy strategy,
                                          double *out);

/**
 * Exact ground-state mean photon number at Fock truncation `n_max`.
 *
 * # Safety
 *
 * `model` must be a live handle; `out` must point to one writable double.
 */
enum QrabiStatus qrabi_exact_mean_photon(const struct QrabiModel *model, size_t n_max, double *out);

/**
 * Evolve |−1_z⟩ ⊗ |α⟩ under the displaced-frame block Hamiltonian and
 * sample ⟨J_z⟩ and the |−1_z⟩ population at the given times (units 1/ω).
 *
 * # Safety
 *
 * `model` must be a live handle; `times`, `jz_out`, and `p_minus1_out`
 * must point to `samples` readable/writable doubles respectively.
 */
enum QrabiStatus qrabi_dynamics(const struct QrabiModel *model,
                                enum QrabiLambdaStrategy strategy,
                                double alpha,
                                const double *times,
                                size_t samples,
                                double *jz_out,
                                double *p_minus1_out);

/**
 * Message for the most recent failure on this thread; empty when the last
 * call succeeded. The pointer stays valid until the next failing call on
 * the same thread.
 */
const char *qrabi_last_error(void);

/**
 * The library version as a static NUL-terminated string.
 */
const char *qrabi_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QRABI_H */
