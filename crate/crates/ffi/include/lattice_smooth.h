#ifndef LATTICE_SMOOTH_H
#define LATTICE_SMOOTH_H

/* Generated by cbindgen from the lattice-smooth-ffi sources. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum LsStatus {
  LS_STATUS_OK = 0,
  LS_STATUS_NULL_POINTER = 1,
  LS_STATUS_INVALID_ARGUMENT = 2,
  LS_STATUS_DOMAIN = 3,
  LS_STATUS_NUMERICAL = 4,
  LS_STATUS_DIVERGENT = 5,
  LS_STATUS_UNSUPPORTED = 6,
  LS_STATUS_CONFIG = 7,
  LS_STATUS_CAPACITY = 8,
  LS_STATUS_IO = 9,
  LS_STATUS_PANIC = 10,
} LsStatus;

// Realized error field.
typedef struct LsField LsField;

// Probability kernel on `[-1, 1]^d`.
typedef struct LsKernel LsKernel;

// Design, bandwidth and kernel of one estimation problem.
typedef struct LsProblem LsProblem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer stays
// valid until the next call into this library on the same thread.
const char *ls_last_error_message(void);

// Releases a string returned by this library.
//
// # Safety
// `s` must be null or a pointer obtained from this library and not yet freed.
void ls_string_free(char *s);

// Draws a field on `{1..n}^d` from a JSON generator spec.
//
// # Safety
// `spec_json` must be a NUL-terminated string and `out` a writable pointer.
enum LsStatus ls_field_generate(const char *spec_json,
                                size_t d,
                                size_t n,
                                uint64_t seed,
                                struct LsField **out);

// Number of sites `n^d`, or 0 for a null handle.
//
// # Safety
// `field` must be null or a live handle.
size_t ls_field_len(const struct LsField *field);

// Copies the field values in row-major order (first axis slowest) into
// `buffer`, which must hold `len` doubles with `len` equal to the site count.
//
// # Safety
// `field` must be a live handle and `buffer` valid for `len` writes.
enum LsStatus ls_field_values(const struct LsField *field, double *buffer, size_t len);

// # Safety
// `field` must be null or a handle not yet freed.
void ls_field_free(struct LsField *field);

// Uniform density `2^-d` on `[-1, 1]^d`.
//
// # Safety
// `out` must be a writable pointer.
enum LsStatus ls_kernel_uniform(size_t d, struct LsKernel **out);

// Normalized `height + tent * prod_k (1 - |u_k|)` on `[-1, 1]^d`.
//
// # Safety
// `out` must be a writable pointer.
enum LsStatus ls_kernel_pedestal(size_t d, double height, double tent, struct LsKernel **out);

// `K(u)` for a point `u` of length `d`.
//
// # Safety
// `kernel` must be a live handle, `u` valid for `d` reads and `value` writable.
enum LsStatus ls_kernel_eval(const struct LsKernel *kernel,
                             const double *u,
                             size_t d,
                             double *value);

// Certified lower bound, upper bound and Lipschitz constant.
//
// # Safety
// `kernel` must be a live handle and the three outputs writable.
enum LsStatus ls_kernel_constants(const struct LsKernel *kernel,
                                  double *lower,
                                  double *upper,
                                  double *lipschitz);

// # Safety
// `kernel` must be null or a handle not yet freed.
void ls_kernel_free(struct LsKernel *kernel);

// Estimation problem on `{1..n}^d` with bandwidth `h`; the kernel is copied.
//
// # Safety
// `kernel` must be a live handle and `out` writable.
enum LsStatus ls_problem_new(const struct LsKernel *kernel,
                             size_t n,
                             double h,
                             struct LsProblem **out);

// `sum_i a_i(x)`.
//
// # Safety
// `problem` must be a live handle, `x` valid for `d` reads, `value` writable.
enum LsStatus ls_problem_weight_sum(const struct LsProblem *problem,
                                    const double *x,
                                    size_t d,
                                    double *value);

// `g_n(x)` for observations `y` of length `n^d` in row-major order.
//
// # Safety
// `problem` must be a live handle, `y` valid for `len` reads, `x` for `d`
// reads and `value` writable.
enum LsStatus ls_problem_estimate(const struct LsProblem *problem,
                                  const double *y,
                                  size_t len,
                                  const double *x,
                                  size_t d,
                                  double *value);

// # Safety
// `problem` must be null or a handle not yet freed.
void ls_problem_free(struct LsProblem *problem);

// `psi_beta(x)` for `x >= 0`.
//
// # Safety
// `value` must be writable.
enum LsStatus ls_psi(double beta, double x, double *value);

// `2q / (2 - q)` for `0 < q < 2`.
//
// # Safety
// `value` must be writable.
enum LsStatus ls_beta_of_q(double q, double *value);

// Luxemburg norm of a JSON marginal law, e.g. `{"law":"gaussian","sigma":1}`.
//
// # Safety
// `marginal_json` must be a NUL-terminated string and `value` writable.
enum LsStatus ls_luxemburg_norm(const char *marginal_json, double beta, double tol, double *value);

// Runs a study on a JSON experiment config and returns its JSON report in
// `*report`, to be released with [`ls_string_free`]. `study` is one of
// `rates`, `bias`, `variance`, `simulate`, `estimate`, `conditions`.
//
// # Safety
// `study` and `config_json` must be NUL-terminated strings and `report` writable.
enum LsStatus ls_run_study(const char *study, const char *config_json, char **report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LATTICE_SMOOTH_H */
