#ifndef RECBOUND_H
#define RECBOUND_H

/* Generated by cbindgen from recbound-capi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Which case of the bound function fired (mirrors the library enum).
typedef enum RbCase {
  RB_CASE_R_LE_UD = 0,
  RB_CASE_BELOW_D = 1,
  RB_CASE_U_GE_R = 2,
  RB_CASE_GENERAL = 3,
  RB_CASE_SIMPLIFIED_W = 4,
} RbCase;

// Status codes returned by every fallible entry point.
typedef enum RbStatus {
  RB_STATUS_OK = 0,
  RB_STATUS_NULL_POINTER = 1,
  RB_STATUS_INVALID_UTF8 = 2,
  RB_STATUS_PARSE_ERROR = 3,
  RB_STATUS_UNKNOWN_PRESET = 4,
  RB_STATUS_UNKNOWN_NAME = 5,
  RB_STATUS_HYPOTHESIS_VIOLATED = 6,
  RB_STATUS_DOMAIN_ERROR = 7,
  RB_STATUS_NO_CONTRACTION = 8,
  RB_STATUS_UNBOUNDED_U = 9,
  RB_STATUS_SIMULATION_ERROR = 10,
  RB_STATUS_INTERNAL_PANIC = 11,
} RbStatus;

// Which theorem-level bound produced a value.
typedef enum RbTheorem {
  RB_THEOREM_KARP_UNARY = 0,
  RB_THEOREM_KARP_WORK15 = 1,
  RB_THEOREM_SPAN = 2,
  RB_THEOREM_WORK = 3,
} RbTheorem;

// Opaque recurrence specification handle.
typedef struct RbSpec RbSpec;

// An evaluated tail bound: `P[cost > threshold] <= bound`, with the
// pre-clamp value in `raw` so vacuous bounds stay visible.
typedef struct RbBound {
  double threshold;
  double bound;
  double raw;
  enum RbCase case_tag;
  enum RbTheorem theorem;
} RbBound;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread. The pointer stays
// valid until the next failing call on the same thread.
const char *rb_last_error(void);

// Crate version as a static string.
const char *rb_version(void);

// Release a string returned through a `char**` out-parameter.
//
// # Safety
// `s` must be null or a pointer previously returned by this library.
void rb_string_free(char *s);

// Load a shipped preset (`quicksort-span`, `quicksort-work`,
// `bst-height`, `unary-halving`) into a new handle.
//
// # Safety
// `name` must be a NUL-terminated string; `out` must be a valid pointer.
enum RbStatus rb_spec_preset(const char *name, struct RbSpec **out);

// Parse a JSON recurrence spec (same format the CLI accepts).
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be a valid pointer.
enum RbStatus rb_spec_from_json(const char *json, struct RbSpec **out);

// Release a spec handle.
//
// # Safety
// `spec` must be null or a handle from `rb_spec_preset`/`rb_spec_from_json`.
void rb_spec_free(struct RbSpec *spec);

// Run the hypothesis checks. `*out_ok` is set to true when every
// error-severity check passed; the full report text is returned through
// `out_report` when it is non-null (release with `rb_string_free`).
//
// # Safety
// `spec` must be a valid handle; `out_ok` must be a valid pointer;
// `out_report` may be null.
enum RbStatus rb_spec_validate(const struct RbSpec *spec, bool *out_ok, char **out_report);

// Natural-threshold bound at `r = u(x) + w * toll_eff(x)`, dispatched on
// the spec kind (unary / span / work).
//
// # Safety
// `spec` must be a valid handle; `out` must be a valid pointer.
enum RbStatus rb_bound_w(const struct RbSpec *spec, double x, uint32_t w, struct RbBound *out);

// General-threshold bound `P[cost > r]`, dispatched on the spec kind.
//
// # Safety
// `spec` must be a valid handle; `out` must be a valid pointer.
enum RbStatus rb_bound_r(const struct RbSpec *spec, double r, double x, struct RbBound *out);

// Minimal solution of the companion recurrence by iteration.
//
// # Safety
// `spec` must be a valid handle; `out` must be a valid pointer.
enum RbStatus rb_solve_u(const struct RbSpec *spec, double x, double *out);

// Smallest `x` with `u(x) >= y`; arguments at or below `u(d)` clamp to `d`.
//
// # Safety
// `spec` must be a valid handle; `out` must be a valid pointer.
enum RbStatus rb_invert_u(const struct RbSpec *spec, double y, double *out);

// Expected quicksort comparison count `2((n+1)(H_n - 1) - (n - 1))`.
double rb_quicksort_expected_work(uint64_t n);

// Expectation-based bound `P[W >= (w+1) E[W]] < e^-w` for positive `w`.
//
// # Safety
// `out` must be a valid pointer.
enum RbStatus rb_karp_expectation_bound(double expected_work, double w, struct RbBound *out);

// Simulate a shipped process model (`quicksort`, `bst`, `unary-uniform`)
// and report the strict empirical tail `P[X > r]` together with its
// one-sided 99% Wilson upper confidence bound.
//
// # Safety
// `model` and `metric` must be NUL-terminated strings; `out_tail` and
// `out_ci_upper` must be valid pointers.
enum RbStatus rb_simulate_tail(const char *model,
                               uint64_t n,
                               const char *metric,
                               uint64_t trials,
                               uint64_t seed,
                               double r,
                               double *out_tail,
                               double *out_ci_upper);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RECBOUND_H */
