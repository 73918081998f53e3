#ifndef DKP_H
#define DKP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of any fallible call across the boundary.
 */
typedef enum {
  DKP_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  DKP_STATUS_NULL_POINTER = 1,
  /**
   * Input data violated a structural constraint (dimensions, fields, JSON).
   */
  DKP_STATUS_INVALID_INPUT = 2,
  /**
   * The computation failed numerically (blow-up, degenerate spectrum).
   */
  DKP_STATUS_NUMERICAL = 3,
  /**
   * An internal panic was caught at the boundary.
   */
  DKP_STATUS_PANIC = 4,
} DkpStatus;

/**
 * Opaque handle to an extracted spectral curve and its Newton polygon.
 */
typedef struct DkpCurve DkpCurve;

/**
 * Opaque handle to a lattice state.
 */
typedef struct DkpState DkpState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * ABI revision of this header/library pair.
 */
uint32_t dkp_abi_version(void);

/**
 * Message for the most recent failure on this thread, or null if none.
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *dkp_last_error(void);

/**
 * Seeded random state on an n x m torus (n, m coprime, both at least 2).
 *
 * # Safety
 * `out` must be a valid pointer to writable memory.
 */
DkpStatus dkp_state_random(uintptr_t n, uintptr_t m, uint64_t seed, DkpState **out);

/**
 * The distinguished three-term-curve state on an n x m torus.
 *
 * # Safety
 * `out` must be a valid pointer to writable memory.
 */
DkpStatus dkp_state_special(uintptr_t n, uintptr_t m, DkpState **out);

/**
 * Parse a state from its JSON form.
 *
 * # Safety
 * `text` must be a valid NUL-terminated string; `out` must be writable.
 */
DkpStatus dkp_state_from_json(const char *text, DkpState **out);

/**
 * Serialize a state to JSON. Returns null on error; free the result with
 * `dkp_string_free`.
 *
 * # Safety
 * `state` must be a live handle from this library.
 */
char *dkp_state_to_json(const DkpState *state);

/**
 * Torus dimensions of a state.
 *
 * # Safety
 * All pointers must be valid; `state` must be a live handle.
 */
DkpStatus dkp_state_dims(const DkpState *state, uintptr_t *n, uintptr_t *m);

/**
 * Release a state handle. Null is ignored.
 *
 * # Safety
 * `state` must be null or a live handle from this library, not yet freed.
 */
void dkp_state_free(DkpState *state);

/**
 * Release a string returned by this library. Null is ignored.
 *
 * # Safety
 * `text` must be null or a string returned by this library, not yet freed.
 */
void dkp_string_free(char *text);

/**
 * Interpolate the spectral-curve polynomial of a state.
 *
 * # Safety
 * `state` must be a live handle; `out` must be writable.
 */
DkpStatus dkp_curve_compute(const DkpState *state, DkpCurve **out);

/**
 * Coefficient of α^i β^j; i in [−M, M], j in [0, N].
 *
 * # Safety
 * All pointers must be valid; `curve` must be a live handle.
 */
DkpStatus dkp_curve_coeff(const DkpCurve *curve, int64_t i, int64_t j, double *re, double *im);

/**
 * Number of coefficients above the structural-zero threshold (0 for null).
 *
 * # Safety
 * `curve` must be null or a live handle.
 */
uintptr_t dkp_curve_support_len(const DkpCurve *curve);

/**
 * Newton-polygon genus data: interior lattice-point count, the generic
 * expectation (N−1)M, and whether the support is generic.
 *
 * # Safety
 * All pointers must be valid; `curve` must be a live handle.
 */
DkpStatus dkp_curve_genus(const DkpCurve *curve,
                          uintptr_t *interior,
                          uintptr_t *expected,
                          bool *generic_support);

/**
 * Release a curve handle. Null is ignored.
 *
 * # Safety
 * `curve` must be null or a live handle from this library, not yet freed.
 */
void dkp_curve_free(DkpCurve *curve);

/**
 * Integrate the flow with fixed-step RK4, returning the final state and the
 * worst relative drift of any curve coefficient along the way.
 *
 * # Safety
 * `state` must be a live handle; `out_state` and `out_max_drift` writable.
 */
DkpStatus dkp_flow_integrate(const DkpState *state,
                             double dt,
                             uintptr_t steps,
                             uintptr_t record_every,
                             DkpState **out_state,
                             double *out_max_drift);

/**
 * The κ, ρ, φ sign-table values at one site of an n x m torus.
 *
 * # Safety
 * The three output pointers must be valid.
 */
DkpStatus dkp_sign_tables_at(uintptr_t n,
                             uintptr_t m,
                             int64_t site_n,
                             int64_t site_m,
                             int8_t *kappa,
                             int8_t *rho,
                             int8_t *phi);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DKP_H */
