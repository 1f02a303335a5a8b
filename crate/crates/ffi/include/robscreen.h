#ifndef ROBSCREEN_H
#define ROBSCREEN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RsStatus {
  RS_STATUS_OK = 0,
  RS_STATUS_NULL_POINTER = 1,
  RS_STATUS_INVALID_INPUT = 2,
  RS_STATUS_SINGULAR_DESIGN = 3,
  RS_STATUS_OUT_OF_SUPPORT = 4,
  RS_STATUS_DEGENERATE = 5,
  RS_STATUS_INTERNAL = 6,
  RS_STATUS_PANIC = 7,
} RsStatus;

// Screening methods accepted by [`rs_screen`].
typedef enum RsMethod {
  RS_METHOD_RC = 0,
  RS_METHOD_RPC_L2 = 1,
  RS_METHOD_RPC_L1 = 2,
  RS_METHOD_PEARSON = 3,
  RS_METHOD_KENDALL = 4,
} RsMethod;

// Opaque dataset handle.
typedef struct RsDataset RsDataset;

// Opaque screening report handle.
typedef struct RsReport RsReport;

typedef struct RsBootstrapResult {
  double statistic;
  double critical_value;
  double p_value;
  // 1 when the independence hypothesis is rejected.
  int32_t reject;
} RsBootstrapResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread; empty after a success.
// The pointer stays valid until the next call on the same thread.
const char *rs_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *rs_version(void);

// Copies `n` responses, an `n x p` column-major covariate block and an
// optional exposure (`z` may be null) into a new dataset handle.
//
// # Safety
// `y` and `z` (if non-null) must point to `n` values, `x` to `n * p` values
// and `out` to writable storage for one handle.
enum RsStatus rs_dataset_new(const double *y,
                             const double *x,
                             size_t n,
                             size_t p,
                             const double *z,
                             struct RsDataset **out);

// # Safety
// `ds` must be null or a handle from [`rs_dataset_new`] not yet freed.
void rs_dataset_free(struct RsDataset *ds);

// Screens the dataset with `method` (an [`RsMethod`] value), keeping the
// top `top_d` covariates; `top_d = 0` selects the default `floor(n / ln n)`.
//
// # Safety
// `ds` must be a live dataset handle and `out` writable.
enum RsStatus rs_screen(const struct RsDataset *ds,
                        uint32_t method,
                        size_t top_d,
                        struct RsReport **out);

// # Safety
// `report` must be null or a handle from [`rs_screen`] not yet freed.
void rs_report_free(struct RsReport *report);

// Number of covariates in the report; 0 for a null handle.
//
// # Safety
// `report` must be null or a live report handle.
size_t rs_report_p(const struct RsReport *report);

// Number of selected covariates; 0 for a null handle.
//
// # Safety
// `report` must be null or a live report handle.
size_t rs_report_selected_len(const struct RsReport *report);

// Copies the `p` utilities (column order) into `out`, which holds `len` values.
//
// # Safety
// `report` must be a live report handle; `out` must hold `len` values.
enum RsStatus rs_report_utilities(const struct RsReport *report, double *out, size_t len);

// Copies the 0-based column indices by descending utility.
//
// # Safety
// `report` must be a live report handle; `out` must hold `len` values.
enum RsStatus rs_report_ranking(const struct RsReport *report, size_t *out, size_t len);

// Copies the 0-based selected column indices, in ranking order.
//
// # Safety
// `report` must be a live report handle; `out` must hold `len` values.
enum RsStatus rs_report_selected(const struct RsReport *report, size_t *out, size_t len);

// Robust correlation utility of one covariate column.
//
// # Safety
// `y` and `x` must point to `n` values; `out` must be writable.
enum RsStatus rs_rc_utility(const double *y, const double *x, size_t n, double *out);

// Wild bootstrap independence test with `replicates` resamples.
//
// # Safety
// `y` and `x` must point to `n` values; `out` must be writable.
enum RsStatus rs_wild_bootstrap_test(const double *y,
                                     const double *x,
                                     size_t n,
                                     size_t replicates,
                                     double alpha,
                                     uint64_t seed,
                                     struct RsBootstrapResult *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ROBSCREEN_H */
