#ifndef NOMA_LAB_H
#define NOMA_LAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NlDetector {
  NL_DETECTOR_ADMM = 0,
  NL_DETECTOR_MMSE = 1,
  NL_DETECTOR_MPA = 2,
  NL_DETECTOR_GSD = 3,
} NlDetector;

typedef enum NlScheme {
  NL_SCHEME_SCMA = 0,
  NL_SCHEME_DCMA = 1,
  NL_SCHEME_SPREADING = 2,
} NlScheme;

typedef enum NlStatus {
  NL_STATUS_OK = 0,
  NL_STATUS_NULL_POINTER = 1,
  NL_STATUS_INVALID_ARGUMENT = 2,
  NL_STATUS_NOT_FOUND = 3,
  NL_STATUS_INVALID_CODEBOOK = 4,
  NL_STATUS_INVALID_CONFIG = 5,
  NL_STATUS_UNSUPPORTED = 6,
  NL_STATUS_NUMERIC = 7,
  NL_STATUS_IO = 8,
  NL_STATUS_PANIC = 9,
} NlStatus;

/**
 * Opaque codebook set.
 */
typedef struct NlCodebookSet NlCodebookSet;

/**
 * System dimensions for the FLOP model.
 */
typedef struct NlFlopParams {
  size_t ues;
  size_t resources;
  size_t rx_antennas;
  size_t dv;
  size_t order;
  uint32_t iterations;
  /**
   * Variable-node count of the MPA formula; 0 means `resources`.
   */
  size_t mpa_variable_nodes;
} NlFlopParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *nl_version(void);

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next library call on the same thread.
 */
const char *nl_last_error_message(void);

/**
 * # Safety
 * `s` must come from this library and not have been freed. NULL is ignored.
 */
void nl_string_free(char *s);

/**
 * Loads and validates a codebook file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a writable pointer.
 */
enum NlStatus nl_codebook_load(const char *path, struct NlCodebookSet **out);

/**
 * Builds the reference codebooks. `dv` of 0 picks the default degree.
 *
 * # Safety
 * `out` must be a writable pointer.
 */
enum NlStatus nl_codebook_generate(enum NlScheme scheme,
                                   size_t ues,
                                   size_t resources,
                                   size_t order,
                                   size_t dv,
                                   struct NlCodebookSet **out);

/**
 * # Safety
 * `set` must come from this library and not have been freed. NULL is ignored.
 */
void nl_codebook_free(struct NlCodebookSet *set);

/**
 * Writes J, K and M of the set.
 *
 * # Safety
 * `set` must be a live handle; the out-pointers must be writable.
 */
enum NlStatus nl_codebook_dims(const struct NlCodebookSet *set,
                               size_t *ues,
                               size_t *resources,
                               size_t *order);

/**
 * Box half-widths of one UE's codebook.
 *
 * # Safety
 * `set` must be a live handle; `alpha` and `beta` must be writable.
 */
enum NlStatus nl_codebook_box_bounds(const struct NlCodebookSet *set,
                                     size_t ue,
                                     double *alpha,
                                     double *beta);

/**
 * Serializes the set in the codebook file format. Free with
 * [`nl_string_free`].
 *
 * # Safety
 * `set` must be a live handle; `out` must be writable.
 */
enum NlStatus nl_codebook_to_json(const struct NlCodebookSet *set, char **out);

/**
 * Total FLOPs of one detector on one system. MPA implies SCMA and the
 * sphere decoder implies spreading; `scheme` is ignored for both.
 *
 * # Safety
 * `params` and `out` must be valid pointers.
 */
enum NlStatus nl_flops_total(enum NlDetector detector,
                             enum NlScheme scheme,
                             const struct NlFlopParams *params,
                             uint64_t *out);

/**
 * Runs a sweep described by a JSON run config and returns the SER CSV.
 * Relative codebook paths resolve against the working directory. A
 * `workers` of 0 uses one thread per core.
 *
 * # Safety
 * `config_json` must be NUL-terminated; `out_csv` must be writable.
 */
enum NlStatus nl_simulate_json(const char *config_json,
                               size_t workers,
                               bool record_timing,
                               char **out_csv);

/**
 * One SIMO ADMM detection.
 *
 * `r` holds `K·N_r` complex samples and `h` the row-major
 * `K·N_r × J·N_e` matrix, both as interleaved (re, im) doubles; row
 * `n·K + k` is antenna `n` on RE `k`, column `j·N_e + d` is entry `d` of UE
 * `j`. `rho` ≤ 0 selects the noise-based default. `symbols` receives J
 * codeword indices.
 *
 * # Safety
 * `set` must be a live handle; `r`, `h` and `symbols` must point to arrays
 * of the stated lengths.
 */
enum NlStatus nl_detect_simo(const struct NlCodebookSet *set,
                             size_t rx_antennas,
                             const double *r,
                             const double *h,
                             double noise_var,
                             size_t iterations,
                             double gamma,
                             double rho,
                             uint32_t *symbols);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NOMA_LAB_H */
