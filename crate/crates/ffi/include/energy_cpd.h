/* SPDX-License-Identifier: MIT OR Apache-2.0 */

#ifndef ENERGY_CPD_H
#define ENERGY_CPD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Result codes.
typedef enum EcpStatus {
  ECP_STATUS_OK = 0,
  // A required pointer argument was NULL.
  ECP_STATUS_NULL_POINTER = 1,
  // An argument was outside its domain.
  ECP_STATUS_INVALID_ARGUMENT = 2,
  // A sample had fewer than two observations.
  ECP_STATUS_INSUFFICIENT_SAMPLE = 3,
  // The library panicked; the handle arguments are left untouched.
  ECP_STATUS_INTERNAL = 4,
} EcpStatus;

// Opaque outcome of a divisive run.
typedef struct EcpDivisiveResult EcpDivisiveResult;

// Opaque outcome of an agglomerative run.
typedef struct EcpMergeTrace EcpMergeTrace;

// Opaque multivariate time series.
typedef struct EcpSeries EcpSeries;

// Parameters of the divisive procedure.
typedef struct EcpDivisiveConfig {
  // Distance exponent in (0, 2).
  double alpha;
  // Smallest admissible cluster size (>= 2).
  size_t min_size;
  // Permutation replicates per significance test.
  size_t permutations;
  // A split is accepted when its p-value is below this level.
  double significance;
  // Upper bound on the number of change points; 0 means unbounded.
  size_t max_change_points;
  uint64_t seed;
} EcpDivisiveConfig;

// One tested split of a divisive run.
typedef struct EcpStep {
  size_t order;
  // 1-based index of the cluster that was split.
  size_t cluster;
  size_t tau;
  size_t kappa;
  double qhat;
  size_t exceedances;
  double pvalue;
  bool significant;
} EcpStep;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the last failure on the calling thread, or NULL if
// none occurred. Valid until the next failing call on the same thread.
const char *ecp_last_error(void);

// Library version as a static NUL-terminated string.
const char *ecp_version(void);

// Copies `len * dim` row-major observations into a new series handle.
//
// # Safety
// `data` must point to `len * dim` doubles; `out` must be writable.
enum EcpStatus ecp_series_new(const double *data, size_t len, size_t dim, struct EcpSeries **out);

// # Safety
// `series` must be NULL or a handle from [`ecp_series_new`] not yet freed.
void ecp_series_free(struct EcpSeries *series);

// # Safety
// `series` must be a live handle.
size_t ecp_series_len(const struct EcpSeries *series);

// # Safety
// `series` must be a live handle.
size_t ecp_series_dim(const struct EcpSeries *series);

// Library defaults: α = 1, min_size 30, 499 permutations, level 0.05.
struct EcpDivisiveConfig ecp_divisive_config_default(void);

// Runs E-Divisive. `config` may be NULL for the defaults.
//
// # Safety
// `series` must be a live handle; `config` NULL or valid; `out` writable.
enum EcpStatus ecp_e_divisive(const struct EcpSeries *series,
                              const struct EcpDivisiveConfig *config,
                              struct EcpDivisiveResult **out);

// # Safety
// `result` must be NULL or a handle from [`ecp_e_divisive`] not yet freed.
void ecp_divisive_result_free(struct EcpDivisiveResult *result);

// Accepted change points in increasing order.
//
// # Safety
// `result` must be a live handle; `out` must hold `capacity` elements.
size_t ecp_divisive_change_points(const struct EcpDivisiveResult *result,
                                  size_t *out,
                                  size_t capacity);

// Number of tested splits, including a final rejected one.
//
// # Safety
// `result` must be a live handle.
size_t ecp_divisive_num_steps(const struct EcpDivisiveResult *result);

// The `index`-th (0-based) tested split.
//
// # Safety
// `result` must be a live handle; `out` writable.
enum EcpStatus ecp_divisive_step(const struct EcpDivisiveResult *result,
                                 size_t index,
                                 struct EcpStep *out);

// Runs E-Agglomerative from the initial clustering given by its
// boundaries (at least two clusters, each of size >= 2).
//
// # Safety
// `series` must be a live handle; `boundaries` must hold `count` elements;
// `out` writable.
enum EcpStatus ecp_e_agglo(const struct EcpSeries *series,
                           const size_t *boundaries,
                           size_t count,
                           double alpha,
                           struct EcpMergeTrace **out);

// Agglomerative run from equal-width initial clusters.
//
// # Safety
// `series` must be a live handle; `out` writable.
enum EcpStatus ecp_e_agglo_equal_width(const struct EcpSeries *series,
                                       size_t width,
                                       double alpha,
                                       struct EcpMergeTrace **out);

// # Safety
// `trace` must be NULL or a handle from an agglomerative run not yet freed.
void ecp_merge_trace_free(struct EcpMergeTrace *trace);

// Goodness of fit after each merge; entry `i` belongs to `n - i` clusters,
// where `n` is the initial cluster count.
//
// # Safety
// `trace` must be a live handle; `out` must hold `capacity` elements.
size_t ecp_merge_trace_gof(const struct EcpMergeTrace *trace, double *out, size_t capacity);

// Number of clusters of the best-fitting partition.
//
// # Safety
// `trace` must be a live handle.
size_t ecp_merge_trace_best_k(const struct EcpMergeTrace *trace);

// Change points of the best-fitting partition.
//
// # Safety
// `trace` must be a live handle; `out` must hold `capacity` elements.
size_t ecp_merge_trace_change_points(const struct EcpMergeTrace *trace,
                                     size_t *out,
                                     size_t capacity);

// Ê between samples `x` (`n` rows) and `y` (`m` rows) of dimension `dim`.
//
// # Safety
// `x` and `y` must hold `n * dim` and `m * dim` doubles; `out` writable.
enum EcpStatus ecp_empirical_divergence(const double *x,
                                        size_t n,
                                        const double *y,
                                        size_t m,
                                        size_t dim,
                                        double alpha,
                                        double *out);

// Rand index between two segmentations of a series of length `len`.
//
// # Safety
// `truth` and `estimate` must hold the given counts; `out` writable.
enum EcpStatus ecp_rand_index(const size_t *truth,
                              size_t truth_count,
                              const size_t *estimate,
                              size_t estimate_count,
                              size_t len,
                              double *out);

// Adjusted Rand index between two segmentations of a series of length
// `len`.
//
// # Safety
// `truth` and `estimate` must hold the given counts; `out` writable.
enum EcpStatus ecp_adjusted_rand(const size_t *truth,
                                 size_t truth_count,
                                 const size_t *estimate,
                                 size_t estimate_count,
                                 size_t len,
                                 double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ENERGY_CPD_H */
