/* C interface of the dppsim sampler. Generated; do not edit. */

#ifndef DPPSIM_H
#define DPPSIM_H

/* Generated with cbindgen:0.29.4 */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call in this ABI.
typedef enum DppStatus {
  // The call succeeded.
  DPP_STATUS_OK = 0,
  // A required pointer argument was null.
  DPP_STATUS_NULL_ARGUMENT = 1,
  // An argument was outside its documented domain.
  DPP_STATUS_INVALID_ARGUMENT = 2,
  // A numerical routine failed to converge or degenerated.
  DPP_STATUS_NUMERICAL = 3,
  // The library caught an internal panic; state may be inconsistent.
  DPP_STATUS_INTERNAL = 4,
} DppStatus;

// Sampling mode selector.
typedef enum DppMode {
  // Dense conditional evaluation over the whole active set.
  DPP_MODE_EXACT = 0,
  // Sparse ring-restricted evaluation.
  DPP_MODE_RING = 1,
} DppMode;

// Opaque spectral model of the Ginibre process on a disc: the truncated
// eigenvalue sequence plus the ring-masked eigenfunction basis.
typedef struct DppModel DppModel;

// Opaque sampled configuration.
typedef struct DppSample DppSample;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the most recent failure on the calling thread, as a
// NUL-terminated UTF-8 string. The pointer stays valid until the next
// failing call on the same thread. Never null; empty before any failure.
const char *dpp_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *dpp_version(void);

// Builds a spectral model for the disc of the given radius.
//
// `margin` is the truncation safety margin (3.0 is a sound default);
// `palm` conditions on a point at the origin; `thinning` in (0, 1] keeps
// each point independently with that probability; `dilation` rescales the
// output intensity by that factor. Pass 1.0 for both to disable. On
// success writes a handle to `out` which must be released with
// [`dpp_model_free`].
//
// # Safety
// `out` must be a valid pointer to writable memory for one pointer.
enum DppStatus dpp_model_new(double radius,
                             double margin,
                             bool palm,
                             double thinning,
                             double dilation,
                             struct DppModel **out);

// Releases a model handle. Null is accepted and ignored.
//
// # Safety
// `model` must be null or a pointer obtained from [`dpp_model_new`] that
// has not been freed yet.
void dpp_model_free(struct DppModel *model);

// Number of retained spectral indices (the truncation point N).
//
// # Safety
// `model` must be a live handle from [`dpp_model_new`].
size_t dpp_model_truncation(const struct DppModel *model);

// Expected point count, i.e. the sum of retained eigenvalues.
//
// # Safety
// `model` must be a live handle from [`dpp_model_new`]. Returns NaN for
// null.
double dpp_model_trace(const struct DppModel *model);

// Bernoulli retention probability of spectral index `index`, or NaN when
// the index is at or beyond the truncation point.
//
// # Safety
// `model` must be a live handle from [`dpp_model_new`].
double dpp_model_eigenvalue(const struct DppModel *model,
                            size_t index);

// Draws one configuration from the model.
//
// `seed` and `stream_index` select a reproducible random substream: the
// same triple (model parameters, seed, stream_index) always yields the
// same configuration. On success writes a handle to `out` which must be
// released with [`dpp_sample_free`].
//
// # Safety
// `model` must be a live handle and `out` a valid pointer to writable
// memory for one pointer.
enum DppStatus dpp_sample(const struct DppModel *model,
                          enum DppMode mode,
                          uint64_t seed,
                          uint64_t stream_index,
                          struct DppSample **out);

// Releases a sample handle. Null is accepted and ignored.
//
// # Safety
// `sample` must be null or a pointer obtained from [`dpp_sample`] that
// has not been freed yet.
void dpp_sample_free(struct DppSample *sample);

// Number of points in the sample. Returns 0 for null.
//
// # Safety
// `sample` must be null or a live handle from [`dpp_sample`].
size_t dpp_sample_len(const struct DppSample *sample);

// Copies the sampled points into `out` as interleaved re/im pairs, so the
// buffer must hold `2 * dpp_sample_len(sample)` doubles.
//
// # Safety
// `sample` must be a live handle and `out` a valid pointer to writable
// memory for `2 * dpp_sample_len(sample)` doubles.
enum DppStatus dpp_sample_points(const struct DppSample *sample,
                                 double *out);

// Optimal quadratic matching cost between two configurations of equal
// size, passed as interleaved re/im buffers of `2 * len` doubles each.
//
// # Safety
// `a` and `b` must point to `2 * len` readable doubles each (they may be
// null when `len` is 0) and `out_cost` to one writable double.
enum DppStatus dpp_matching_cost(const double *a,
                                 const double *b,
                                 size_t len,
                                 double *out_cost);

// Total-variation style distance between two configurations: points
// unmatched within `tolerance`, counted from both sides. Buffers are
// interleaved re/im, `2 * len_a` and `2 * len_b` doubles.
//
// # Safety
// `a` and `b` must point to `2 * len_a` and `2 * len_b` readable doubles
// (null allowed for empty sides) and `out_distance` to one writable u64.
enum DppStatus dpp_tv_distance(const double *a,
                               size_t len_a,
                               const double *b,
                               size_t len_b,
                               double tolerance,
                               uint64_t *out_distance);

// Spectral tail bound sqrt(2/pi) * radius * exp(-margin^2) on the mass
// dropped by truncating at ceil((radius + margin)^2). Returns NaN outside
// the domain radius > margin > 0.
double dpp_truncation_bound(double radius,
                            double margin);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DPPSIM_H */
