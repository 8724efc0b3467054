#ifndef FIBERIP_H
#define FIBERIP_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every call.
typedef enum FipStatus {
  FIP_STATUS_OK = 0,
  // null pointer, invalid UTF-8 or a non-finite input
  FIP_STATUS_INVALID_ARGUMENT = 1,
  // argument outside the domain of the function
  FIP_STATUS_DOMAIN = 2,
  FIP_STATUS_NON_CONVERGENCE = 3,
  // sections touch or overlap, or the pair frame is degenerate
  FIP_STATUS_CONTACT = 4,
  FIP_STATUS_CONFIG = 5,
  // Newton or linear solve failure
  FIP_STATUS_SOLVER = 6,
  FIP_STATUS_IO = 7,
  // internal panic, caught at the boundary
  FIP_STATUS_PANIC = 8,
} FipStatus;

// Opaque handle: a composite power law bound to one section pair.
typedef struct FipLaw FipLaw;

// Section-section potential and its derivatives at one `(q1, q2)`.
typedef struct FipDerivatives {
  double phi;
  double phi_1;
  double phi_2;
  double phi_11;
  double phi_12;
  double phi_22;
} FipDerivatives;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Build a law from `n` (exponent, coefficient) pairs and a section pair.
//
// # Safety
// `exponents` and `coefficients` must point to `n` readable doubles and
// `out_law` to writable storage for one pointer. Release the handle with
// [`fip_law_free`].
enum FipStatus fip_law_new(const double *exponents,
                           const double *coefficients,
                           size_t n,
                           double radius_x,
                           double radius_y,
                           double density_x,
                           double density_y,
                           struct FipLaw **out_law);

// Release a handle from [`fip_law_new`]; null is ignored.
//
// # Safety
// `law` must be null or a handle that has not been freed yet.
void fip_law_free(struct FipLaw *law);

// Section-section potential at offset `q1` and gap `q2`.
//
// # Safety
// `law` must be a live handle and `out_value` writable.
enum FipStatus fip_issip_value(const struct FipLaw *law, double q1, double q2, double *out_value);

// Potential with first and second derivatives in `(q1, q2)`.
//
// # Safety
// `law` must be a live handle and `out_derivs` writable.
enum FipStatus fip_issip_derivatives(const struct FipLaw *law,
                                     double q1,
                                     double q2,
                                     struct FipDerivatives *out_derivs);

// Offset-free section law evaluated at the centroid difference `(dx, dy)`,
// with the force on the first section; the second receives the opposite force.
//
// # Safety
// `law` must be a live handle and the three out-pointers writable.
enum FipStatus fip_lssip_force(const struct FipLaw *law,
                               double dx,
                               double dy,
                               double *out_value,
                               double *out_fx,
                               double *out_fy);

// Potential per unit length of a section against an infinite parallel
// cylinder at gap `q2`.
//
// # Safety
// `law` must be a live handle and `out_value` writable.
enum FipStatus fip_cylinder_per_length(const struct FipLaw *law, double q2, double *out_value);

// Stationary gap of the per-length potential; the law must have exactly
// one attractive and one repulsive term.
//
// # Safety
// `law` must be a live handle and `out_gap` writable.
enum FipStatus fip_equilibrium_gap(const struct FipLaw *law, double *out_gap);

// Gauss hypergeometric function for real `z <= 0`.
//
// # Safety
// `out_value` must be writable.
enum FipStatus fip_hyp2f1(double a, double b, double c, double z, double *out_value);

// Gamma function for `x > 0`.
//
// # Safety
// `out_value` must be writable.
enum FipStatus fip_gamma(double x, double *out_value);

// Run the scenario in the JSON `config`, writing artifacts under `out_dir`.
// On success `*out_summary` (if not null) receives the summary JSON, to be
// released with [`fip_string_free`].
//
// # Safety
// `config` and `out_dir` must be NUL-terminated strings; `out_summary`
// must be null or writable.
enum FipStatus fip_run_scenario(const char *config, const char *out_dir, char **out_summary);

// Release a string returned by this library; null is ignored.
//
// # Safety
// `s` must be null or a string from this library not yet freed.
void fip_string_free(char *s);

// Message of the last failed call on this thread, empty after a success.
// The pointer stays valid until the next call on the same thread.
const char *fip_last_error(void);

// Library version as a static NUL-terminated string.
const char *fip_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FIBERIP_H */
