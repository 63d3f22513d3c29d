#ifndef H1CUTOFF_H
#define H1CUTOFF_H

#include <stddef.h>

typedef enum H1cStatus {
  H1C_STATUS_OK = 0,
  H1C_STATUS_NULL_POINTER = 1,
  H1C_STATUS_INVALID_ARGUMENT = 2,
  H1C_STATUS_GRID_MISMATCH = 3,
  H1C_STATUS_CERTIFICATION_FAILED = 4,
  H1C_STATUS_PANIC = 5,
} H1cStatus;

/*
 Cut-off operator at a fixed scale.
 */
typedef struct H1cCutoff H1cCutoff;

/*
 Sampled function on a uniform grid.
 */
typedef struct H1cFunction H1cFunction;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or an empty string. The
 pointer stays valid until the next call into this library.
 */
const char *h1c_last_error(void);

/*
 Builds a function on `[-half_length, half_length]` with `cells_per_unit`
 cells per unit length from `len` interleaved samples
 (`len = points * components`).

 # Safety
 `samples` must point to `len` readable doubles; `out` must be writable.
 */
enum H1cStatus h1c_function_new(size_t half_length,
                                size_t cells_per_unit,
                                size_t components,
                                const double *samples,
                                size_t len,
                                struct H1cFunction **out);

/*
 # Safety
 `f` must be null or a handle from this library not yet freed.
 */
void h1c_function_free(struct H1cFunction *f);

/*
 Number of stored doubles (`points * components`).

 # Safety
 `f` must be a live handle; `len` must be writable.
 */
enum H1cStatus h1c_function_len(const struct H1cFunction *f, size_t *len);

/*
 Copies the samples into `buf`, which must hold exactly
 `h1c_function_len` doubles.

 # Safety
 `f` must be a live handle; `buf` must point to `len` writable doubles.
 */
enum H1cStatus h1c_function_samples(const struct H1cFunction *f, double *buf, size_t len);

/*
 Cut-off with the standard partition pair at scale `epsilon`.

 # Safety
 `out` must be writable.
 */
enum H1cStatus h1c_cutoff_new(double epsilon, struct H1cCutoff **out);

/*
 # Safety
 `c` must be null or a handle from this library not yet freed.
 */
void h1c_cutoff_free(struct H1cCutoff *c);

/*
 `chi_eps(u)` as a new handle.

 # Safety
 `u` and `c` must be live handles; `out` must be writable.
 */
enum H1cStatus h1c_apply_cutoff(const struct H1cFunction *u,
                                const struct H1cCutoff *c,
                                struct H1cFunction **out);

/*
 `chi_eps(u)^2` as a new handle.

 # Safety
 `u` and `c` must be live handles; `out` must be writable.
 */
enum H1cStatus h1c_f_eps(const struct H1cFunction *u,
                         const struct H1cCutoff *c,
                         struct H1cFunction **out);

/*
 Derivative of `chi_eps(.)^2` at `u` in direction `v`.

 # Safety
 `u`, `v` and `c` must be live handles; `out` must be writable.
 */
enum H1cStatus h1c_f_eps_derivative(const struct H1cFunction *u,
                                    const struct H1cFunction *v,
                                    const struct H1cCutoff *c,
                                    struct H1cFunction **out);

/*
 Exponentially weighted H1 norm with decay rate `eta >= 0`.

 # Safety
 `u` must be a live handle; `out` must be writable.
 */
enum H1cStatus h1c_weighted_norm(const struct H1cFunction *u, double eta, double *out);

/*
 Largest H1 norm over unit windows.

 # Safety
 `u` must be a live handle; `out` must be writable.
 */
enum H1cStatus h1c_uniform_norm(const struct H1cFunction *u, double *out);

/*
 Certifies the standard partition pair at sampling step `h_cert` and
 writes the measured constants as a JSON object. Release the string with
 `h1c_string_free`.

 # Safety
 `out` must be writable.
 */
enum H1cStatus h1c_certify_json(double h_cert, char **out);

/*
 # Safety
 `s` must be null or a string returned by this library not yet freed.
 */
void h1c_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* H1CUTOFF_H */
