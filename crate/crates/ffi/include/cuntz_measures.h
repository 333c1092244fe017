/* C interface to the cuntz-measures library. */

#ifndef CUNTZ_MEASURES_H
#define CUNTZ_MEASURES_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible call.
 */
typedef enum {
  CM_STATUS_OK = 0,
  CM_STATUS_NULL_ARGUMENT = 1,
  CM_STATUS_INVALID_ARGUMENT = 2,
  CM_STATUS_PARSE_ERROR = 3,
  CM_STATUS_VALIDATION_FAILED = 4,
  CM_STATUS_CAP_EXCEEDED = 5,
  CM_STATUS_UTF8_ERROR = 6,
} CmStatus;

/**
 * Which measure engine to run.
 */
typedef enum {
  CM_ENGINE_OPERATOR = 0,
  CM_ENGINE_SPECTRAL = 1,
} CmEngine;

/**
 * Opaque filter-system handle.
 */
typedef struct CmFilterSystem CmFilterSystem;

/**
 * Opaque measure-table handle.
 */
typedef struct CmMeasureTable CmMeasureTable;

/**
 * Validation outcome in plain-old-data form.
 */
typedef struct {
  double max_isometry_defect;
  double max_completeness_defect;
  bool passed;
} CmValidationReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Version of the underlying library, as a static NUL-terminated string.
 */
const char *cm_version(void);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must have been returned by a `cm_*` call and not freed already.
 */
void cm_string_free(char *s);

/**
 * The dyadic Haar system.
 */
CmFilterSystem *cm_filter_haar(void);

/**
 * The 3-band Cantor-measure system.
 */
CmFilterSystem *cm_filter_cantor3(void);

/**
 * The 4-tap orthogonal low-pass system with two vanishing moments.
 */
CmFilterSystem *cm_filter_daubechies4(void);

/**
 * The permutative shift system with `n` subbands; NULL when `n < 2`.
 */
CmFilterSystem *cm_filter_permutative(uintptr_t n);

/**
 * Parses the filter-spec JSON `{"N": n, "filters": [[[deg,re,im],...],...]}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
CmStatus cm_filter_from_json(const char *json, CmFilterSystem **out);

/**
 * Serializes a filter system to the filter-spec JSON.
 *
 * # Safety
 * `fs` must be a live handle; `out` receives a string owned by the caller.
 */
CmStatus cm_filter_to_json(const CmFilterSystem *fs, char **out);

/**
 * Number of subbands, or 0 for a NULL handle.
 *
 * # Safety
 * `fs` must be NULL or a live handle.
 */
uintptr_t cm_filter_bands(const CmFilterSystem *fs);

/**
 * Runs the unitarity validation; fills `report` and returns
 * `ValidationFailed` when the defects exceed `tol`.
 *
 * # Safety
 * `fs` must be a live handle and `report` a valid pointer.
 */
CmStatus cm_filter_validate(const CmFilterSystem *fs, double tol, CmValidationReport *report);

/**
 * Releases a filter-system handle. NULL is ignored.
 *
 * # Safety
 * `fs` must have been returned by a `cm_filter_*` constructor and not freed
 * already.
 */
void cm_filter_free(CmFilterSystem *fs);

/**
 * Tabulates the measure induced by the Fourier basis vector `e_p` on all
 * level-`level` cells with the chosen engine.
 *
 * # Safety
 * `fs` must be a live handle and `out` a valid pointer.
 */
CmStatus cm_measure_table_basis(const CmFilterSystem *fs,
                                int64_t p,
                                uint32_t level,
                                CmEngine engine,
                                CmMeasureTable **out);

/**
 * Number of cells (`N^level`), or 0 for a NULL handle.
 *
 * # Safety
 * `table` must be NULL or a live handle.
 */
uintptr_t cm_measure_table_len(const CmMeasureTable *table);

/**
 * Copies all cell values (interval order) into `buf`, which must hold
 * exactly `cm_measure_table_len` entries.
 *
 * # Safety
 * `table` must be a live handle; `buf` must point to `len` writable f64s.
 */
CmStatus cm_measure_table_copy_values(const CmMeasureTable *table, double *buf, uintptr_t len);

/**
 * Total mass of the table.
 *
 * # Safety
 * `table` must be NULL (returns NaN) or a live handle.
 */
double cm_measure_table_total(const CmMeasureTable *table);

/**
 * Renders the table as CSV (`digits,left,value` rows).
 *
 * # Safety
 * `table` must be a live handle; `out` receives a string owned by the caller.
 */
CmStatus cm_measure_table_to_csv(const CmMeasureTable *table, char **out);

/**
 * Releases a measure-table handle. NULL is ignored.
 *
 * # Safety
 * `table` must have been returned by `cm_measure_table_basis` and not freed
 * already.
 */
void cm_measure_table_free(CmMeasureTable *table);

/**
 * One measure value `mu_{e_p}(J_k(a))` for the digit word `a` given as a
 * byte array, computed by the spectral (basis) engine.
 *
 * # Safety
 * `fs` must be a live handle; `digits` must point to `len` readable bytes;
 * `out` must be a valid pointer.
 */
CmStatus cm_mu_basis(const CmFilterSystem *fs,
                     int64_t p,
                     const uint8_t *digits,
                     uintptr_t len,
                     double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CUNTZ_MEASURES_H */
