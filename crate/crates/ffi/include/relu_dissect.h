/* SPDX-License-Identifier: Apache-2.0 */

#ifndef RELU_DISSECT_H
#define RELU_DISSECT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes shared by every function of the C API.
typedef enum RdStatus {
  RD_STATUS_OK = 0,
  RD_STATUS_NULL_POINTER = 1,
  RD_STATUS_INVALID_UTF8 = 2,
  // Malformed JSON or a document that violates the schema.
  RD_STATUS_INVALID_DOCUMENT = 3,
  RD_STATUS_DIMENSION_MISMATCH = 4,
  // The point lies outside the domain of the PWA function.
  RD_STATUS_OUTSIDE_DOMAIN = 5,
  // Conversion failed (degenerate domain, LP failure).
  RD_STATUS_CONVERSION = 6,
  // The value does not fit the output type.
  RD_STATUS_OVERFLOW = 7,
  RD_STATUS_INVALID_ARGUMENT = 8,
  // A Rust panic was caught at the boundary.
  RD_STATUS_PANIC = 9,
} RdStatus;

// Opaque network handle.
typedef struct RdNetwork RdNetwork;

// Opaque piecewise-affine function handle.
typedef struct RdPwa RdPwa;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the last failure on this thread, or null. The
// pointer stays valid until the next failing call on the same thread.
const char *rd_last_error(void);

// Library version as a static NUL-terminated string.
const char *rd_version(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void rd_string_free(char *s);

// Parses a network document.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum RdStatus rd_network_from_json(const char *json, struct RdNetwork **out);

// # Safety
// `net` must be null or a live handle from [`rd_network_from_json`].
void rd_network_free(struct RdNetwork *net);

// # Safety
// `net` must be a live handle; `out` must be writable.
enum RdStatus rd_network_input_dim(const struct RdNetwork *net, size_t *out);

// # Safety
// `net` must be a live handle; `out` must be writable.
enum RdStatus rd_network_output_dim(const struct RdNetwork *net, size_t *out);

// Evaluates the network at `x` (length `x_len`) into `y` (length `y_len`).
//
// # Safety
// `x` and `y` must point to arrays of the given lengths.
enum RdStatus rd_network_forward(const struct RdNetwork *net,
                                 const double *x,
                                 size_t x_len,
                                 double *y,
                                 size_t y_len);

// Converts `net` over the box `[-box_half_width, box_half_width]^d`.
// `workers = 0` uses every logical core.
//
// # Safety
// `net` must be a live handle; `out` must be writable.
enum RdStatus rd_convert(const struct RdNetwork *net,
                         double box_half_width,
                         size_t workers,
                         struct RdPwa **out);

// Parses a PWA document.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum RdStatus rd_pwa_from_json(const char *json, struct RdPwa **out);

// Serializes to canonical JSON; release the result with [`rd_string_free`].
//
// # Safety
// `pwa` must be a live handle; `out` must be writable.
enum RdStatus rd_pwa_to_json(const struct RdPwa *pwa, char **out);

// # Safety
// `pwa` must be null or a live handle from this library.
void rd_pwa_free(struct RdPwa *pwa);

// # Safety
// `pwa` must be a live handle; `out` must be writable.
enum RdStatus rd_pwa_region_count(const struct RdPwa *pwa, size_t *out);

// # Safety
// `pwa` must be a live handle; `out` must be writable.
enum RdStatus rd_pwa_input_dim(const struct RdPwa *pwa, size_t *out);

// # Safety
// `pwa` must be a live handle; `out` must be writable.
enum RdStatus rd_pwa_output_dim(const struct RdPwa *pwa, size_t *out);

// Index of the region containing `x` (boundary tolerance `tol`).
//
// # Safety
// `x` must point to `x_len` values; `out` must be writable.
enum RdStatus rd_pwa_region_of(const struct RdPwa *pwa,
                               const double *x,
                               size_t x_len,
                               double tol,
                               size_t *out);

// Evaluates the PWA function at `x` into `y`.
//
// # Safety
// `x` and `y` must point to arrays of the given lengths.
enum RdStatus rd_pwa_eval(const struct RdPwa *pwa,
                          const double *x,
                          size_t x_len,
                          double tol,
                          double *y,
                          size_t y_len);

// Activation pattern of region `index` as a string of `+`/`-`; release
// with [`rd_string_free`].
//
// # Safety
// `pwa` must be a live handle; `out` must be writable.
enum RdStatus rd_pwa_region_pattern(const struct RdPwa *pwa, size_t index, char **out);

// Maximum number of cells cut by `n` hyperplanes in dimension `d`.
//
// # Safety
// `out` must be writable.
enum RdStatus rd_zaslavsky_bound(uint64_t n, uint64_t d, uint64_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RELU_DISSECT_H */
