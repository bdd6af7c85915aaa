#ifndef EPILIM_H
#define EPILIM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes shared by every entry point.
typedef enum EpilimStatus {
  EPILIM_OK = 0,
  EPILIM_NULL_POINTER = 1,
  EPILIM_INVALID_INPUT = 2,
  EPILIM_UNSUPPORTED = 3,
  // The computation ran but at least one check failed or was refused.
  EPILIM_CHECK_FAILED = 4,
  EPILIM_INTERNAL = 5,
} EpilimStatus;

// Opaque grid function.
typedef struct EpilimGridFunction EpilimGridFunction;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Version of the report JSON schema produced by [`epilim_verify`].
uint32_t epilim_report_version(void);

// Message for the last failed call on this thread, or null. The pointer
// stays valid until the next library call on the same thread.
const char *epilim_last_error(void);

// Releases a string returned by the library. Null is ignored.
//
// # Safety
// `s` must come from this library and must not be used afterwards.
void epilim_string_free(char *s);

// Parses a grid function from its JSON encoding.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a writable pointer.
enum EpilimStatus epilim_grid_function_from_json(const char *json, struct EpilimGridFunction **out);

// Releases a handle. Null is ignored.
//
// # Safety
// `f` must come from this library and must not be used afterwards.
void epilim_grid_function_free(struct EpilimGridFunction *f);

// JSON encoding of a grid function; free the result with [`epilim_string_free`].
//
// # Safety
// `f` must be a live handle and `out` a writable pointer.
enum EpilimStatus epilim_grid_function_to_json(const struct EpilimGridFunction *f, char **out);

// Number of grid nodes.
//
// # Safety
// `f` must be a live handle and `out` a writable pointer.
enum EpilimStatus epilim_grid_function_len(const struct EpilimGridFunction *f, size_t *out);

// Copies the values into `buf` in row-major order, with `±INFINITY` for
// infinite entries. `len` must equal the node count.
//
// # Safety
// `buf` must point to `len` writable doubles.
enum EpilimStatus epilim_grid_function_values(const struct EpilimGridFunction *f,
                                              double *buf,
                                              size_t len);

// Value at a grid node given by its coordinates (`dim` of them).
//
// # Safety
// `point` must point to `dim` readable doubles and `out` must be writable.
enum EpilimStatus epilim_grid_function_at(const struct EpilimGridFunction *f,
                                          const double *point,
                                          size_t dim,
                                          double *out);

// Conjugate `f*` on the dual window `[dual_min, dual_max]^d` with
// `dual_n` nodes per axis.
//
// # Safety
// `f` must be a live handle and `out` a writable pointer.
enum EpilimStatus epilim_conjugate(const struct EpilimGridFunction *f,
                                   double dual_min,
                                   double dual_max,
                                   size_t dual_n,
                                   struct EpilimGridFunction **out);

// Closed convex envelope `f**` on the grid of `f`.
//
// # Safety
// `f` must be a live handle and `out` a writable pointer.
enum EpilimStatus epilim_biconjugate(const struct EpilimGridFunction *f,
                                     struct EpilimGridFunction **out);

// Infimal convolution `f □ g` of two functions on compatible grids.
//
// # Safety
// `f` and `g` must be live handles and `out` a writable pointer.
enum EpilimStatus epilim_infconv(const struct EpilimGridFunction *f,
                                 const struct EpilimGridFunction *g,
                                 struct EpilimGridFunction **out);

// Runs one scenario, or all of them when `scenario` is `"all"`, and writes
// the suite report JSON to `out_json`. `profile` is `"quick"`, `"full"` or
// null for quick. Returns `EPILIM_CHECK_FAILED` when the report does not
// pass; the JSON is written in that case too.
//
// # Safety
// String arguments must be NUL-terminated and `out_json` writable.
enum EpilimStatus epilim_verify(const char *scenario,
                                uint64_t seed,
                                const char *profile,
                                char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EPILIM_H */
