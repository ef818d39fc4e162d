#ifndef ZNRH_H
#define ZNRH_H

#pragma once

/* Generated by cbindgen from crates/znrh-ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Boundary side for points on the contour.
typedef enum ZnrhSide {
  ZNRH_SIDE_AUTO = 0,
  ZNRH_SIDE_PLUS = 1,
  ZNRH_SIDE_MINUS = 2,
} ZnrhSide;

// Status codes returned by every fallible function.
typedef enum ZnrhStatus {
  ZNRH_STATUS_OK = 0,
  ZNRH_STATUS_NULL_POINTER = 1,
  // bad sizes, duplicate points, lambda0 on the wrong side, ...
  ZNRH_STATUS_INVALID_ARGUMENT = 2,
  // quadrature or theta evaluation failed
  ZNRH_STATUS_NUMERICAL = 3,
  // theta[eps, delta](0) vanishes: the problem has no solution
  ZNRH_STATUS_NOT_SOLVABLE = 4,
  // the point lies on the contour and no side was given
  ZNRH_STATUS_ON_CONTOUR = 5,
  ZNRH_STATUS_PANIC = 6,
} ZnrhStatus;

// A curve y^N = p q^(N-1) together with its period data.
typedef struct ZnrhCurve ZnrhCurve;

// A solved Riemann-Hilbert problem.
typedef struct ZnrhSolution ZnrhSolution;

typedef struct ZnrhComplex {
  double re;
  double im;
} ZnrhComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Build a curve of degree `n` from `count` = 2m+1 branch points.
//
// # Safety
// `lambdas` must point to `count` readable values and `out` must be a valid
// pointer to writable storage for one handle.
enum ZnrhStatus znrh_curve_new(uintptr_t n,
                               const struct ZnrhComplex *lambdas,
                               uintptr_t count,
                               struct ZnrhCurve **out);

// Release a curve handle; null is ignored.
//
// # Safety
// `curve` must be null or a handle returned by `znrh_curve_new` that has not been freed.
void znrh_curve_free(struct ZnrhCurve *curve);

// Genus (N-1)m of the curve, 0 for a null handle.
//
// # Safety
// `curve` must be null or a live handle.
uintptr_t znrh_curve_genus(const struct ZnrhCurve *curve);

// Branch point k (1-based) after sorting by real part.
//
// # Safety
// `curve` must be a live handle and `out` writable.
enum ZnrhStatus znrh_curve_branch_point(const struct ZnrhCurve *curve,
                                        uintptr_t k,
                                        struct ZnrhComplex *out);

// Write the g x g Riemann matrix row-major into `out` (length `len` >= g*g).
//
// # Safety
// `curve` must be a live handle and `out` must have room for `len` values.
enum ZnrhStatus znrh_curve_period_matrix(const struct ZnrhCurve *curve,
                                         struct ZnrhComplex *out,
                                         uintptr_t len);

// Solve the problem with constants c, d (each of length (N-1)m) normalized at lambda0.
//
// # Safety
// `curve` must be a live handle, `c` and `d` must point to `len` values and
// `out` must be writable.
enum ZnrhStatus znrh_solution_new(const struct ZnrhCurve *curve,
                                  const struct ZnrhComplex *c,
                                  const struct ZnrhComplex *d,
                                  uintptr_t len,
                                  struct ZnrhComplex lambda0,
                                  struct ZnrhSolution **out);

// Release a solution handle; null is ignored.
//
// # Safety
// `sol` must be null or a handle returned by `znrh_solution_new` that has not been freed.
void znrh_solution_free(struct ZnrhSolution *sol);

// Matrix size N of the solution, 0 for a null handle.
//
// # Safety
// `sol` must be null or a live handle.
uintptr_t znrh_solution_size(const struct ZnrhSolution *sol);

// Evaluate Y(lambda) row-major into `out` (length `len` >= N*N).
//
// # Safety
// `sol` must be a live handle and `out` must have room for `len` values.
enum ZnrhStatus znrh_solution_eval(const struct ZnrhSolution *sol,
                                   struct ZnrhComplex lambda,
                                   enum ZnrhSide side,
                                   struct ZnrhComplex *out,
                                   uintptr_t len);

// Largest jump residual |Y_- - Y_+ G_k| over `per_piece` samples on every contour piece.
//
// # Safety
// `sol` must be a live handle and `out` writable.
enum ZnrhStatus znrh_solution_jump_residual(const struct ZnrhSolution *sol,
                                            uintptr_t per_piece,
                                            double *out);

// The isomonodromic tau function at the curve's branch points.
//
// # Safety
// `sol` must be a live handle and `out` writable.
enum ZnrhStatus znrh_solution_tau(const struct ZnrhSolution *sol, struct ZnrhComplex *out);

// Message of the last failure on this thread, or null. Free it with `znrh_string_free`.
char *znrh_last_error(void);

// Release a string returned by this library; null is ignored.
//
// # Safety
// `s` must be null or a pointer obtained from `znrh_last_error` that has not been freed.
void znrh_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ZNRH_H */
