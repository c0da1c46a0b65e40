#ifndef MVCROFOOT_H
#define MVCROFOOT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MvcStatus {
  MVC_STATUS_OK = 0,
  MVC_STATUS_NULL_POINTER = 1,
  MVC_STATUS_INVALID_ARGUMENT = 2,
  MVC_STATUS_NOT_UNITARY = 3,
  MVC_STATUS_NOT_PURE = 4,
  MVC_STATUS_FACTOR_INVALID = 5,
  MVC_STATUS_SINGULAR = 6,
  MVC_STATUS_GENERATION_FAILED = 7,
  MVC_STATUS_NOT_STRICT = 8,
  MVC_STATUS_PURITY_VIOLATION = 9,
  MVC_STATUS_DIMENSION_MISMATCH = 10,
  MVC_STATUS_NUMERICAL = 11,
  MVC_STATUS_MALFORMED = 12,
  MVC_STATUS_IO = 13,
  MVC_STATUS_PANIC = 14,
} MvcStatus;

typedef enum MvcDirection {
  MVC_DIRECTION_FORWARD = 0,
  MVC_DIRECTION_INVERSE = 1,
} MvcDirection;

// A pure matrix inner function.
typedef struct MvcInner MvcInner;

// An inner function, a strict contraction and the transformed function.
typedef struct MvcPair MvcPair;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread; empty after success.
// The pointer stays valid until the next call on the same thread.
const char *mvc_last_error_message(void);

// Seeded random pure inner function of size `d` and degree `n`.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum MvcStatus mvc_inner_random(size_t d,
                                size_t n,
                                uint64_t seed,
                                bool symmetric,
                                double radius_cap,
                                struct MvcInner **out);

// `Θ = U0·F_1⋯F_n` with `F_k` the factor with zero `zeros[k]` and unit
// direction `directions[k·d .. (k+1)·d]`.
//
// # Safety
// `u0` holds `2·d·d` doubles, `zeros` `2·n`, `directions` `2·n·d`;
// `out` is writable.
enum MvcStatus mvc_inner_assemble(size_t d,
                                  const double *u0,
                                  size_t n,
                                  const double *zeros,
                                  const double *directions,
                                  double radius_cap,
                                  struct MvcInner **out);

// # Safety
// `h` is null or a handle from this library, not yet freed.
void mvc_inner_free(struct MvcInner *h);

// Size `d`, or 0 for a null handle.
//
// # Safety
// `h` is null or a live handle.
size_t mvc_inner_dim(const struct MvcInner *h);

// Degree `n = dim K_Θ`, or 0 for a null handle.
//
// # Safety
// `h` is null or a live handle.
size_t mvc_inner_degree(const struct MvcInner *h);

// Writes `Θ(re + i·im)` into `out` (`2·d·d` doubles).
//
// # Safety
// `h` is live and `out` has room for `2·d·d` doubles.
enum MvcStatus mvc_inner_evaluate(const struct MvcInner *h, double re, double im, double *out);

// Builds the transformed function for the strict contraction `w`.
//
// # Safety
// `theta` is live, `w` holds `2·d·d` doubles and `out` is writable.
enum MvcStatus mvc_pair_new(const struct MvcInner *theta, const double *w, struct MvcPair **out);

// # Safety
// `p` is null or a handle from this library, not yet freed.
void mvc_pair_free(struct MvcPair *p);

// Writes `Θ′(re + i·im)` into `out` (`2·d·d` doubles).
//
// # Safety
// `p` is live and `out` has room for `2·d·d` doubles.
enum MvcStatus mvc_pair_theta_prime_evaluate(const struct MvcPair *p,
                                             double re,
                                             double im,
                                             double *out);

// Applies `J_W` (forward) or its inverse to a coordinate vector of
// length `n` (`2·n` doubles in, `2·n` doubles out).
//
// # Safety
// `p` is live; `input` and `output` each hold `2·n` doubles.
enum MvcStatus mvc_pair_map(const struct MvcPair *p,
                            enum MvcDirection direction,
                            const double *input,
                            double *output);

// Loads an instance file, runs `suite` and returns the JSON report in
// `*report` (free with [`mvc_string_free`]). `*passed` tells whether every
// check passed. A failed check is not an error.
//
// # Safety
// `path` and `suite` are NUL-terminated; `report` and `passed` are writable.
enum MvcStatus mvc_verify_instance(const char *path,
                                   const char *suite,
                                   double tol,
                                   size_t grid,
                                   char **report,
                                   bool *passed);

// # Safety
// `s` is null or a string returned by this library, not yet freed.
void mvc_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MVCROFOOT_H */
