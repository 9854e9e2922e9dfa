#ifndef SFEM_ZZ_H
#define SFEM_ZZ_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SfemStatus {
  SFEM_STATUS_OK = 0,
  SFEM_STATUS_NULL_POINTER = 1,
  SFEM_STATUS_INVALID_ARGUMENT = 2,
  SFEM_STATUS_CONFIG_ERROR = 3,
  SFEM_STATUS_NUMERICAL_ERROR = 4,
  SFEM_STATUS_IO_ERROR = 5,
  SFEM_STATUS_PANIC = 6,
} SfemStatus;

typedef enum SfemMode {
  SFEM_MODE_MODE_I = 1,
  SFEM_MODE_MODE_II = 2,
} SfemMode;

/**
 * Series whose convergence rate can be queried from a study.
 */
typedef enum SfemQuantity {
  SFEM_QUANTITY_EXACT_ERROR = 0,
  SFEM_QUANTITY_ESTIMATED_ERROR = 1,
  SFEM_QUANTITY_RECOVERED_ERROR = 2,
  SFEM_QUANTITY_THETA = 3,
  SFEM_QUANTITY_MEAN_ABS_D = 4,
  SFEM_QUANTITY_SIGMA_D = 5,
} SfemQuantity;

typedef enum SfemFormat {
  SFEM_FORMAT_CSV = 0,
  SFEM_FORMAT_JSON = 1,
} SfemFormat;

/**
 * Result of a single level.
 */
typedef struct SfemCase SfemCase;

/**
 * Resolved study configuration.
 */
typedef struct SfemConfig SfemConfig;

typedef struct SfemMesh SfemMesh;

/**
 * Result of a convergence study, possibly partial.
 */
typedef struct SfemStudy SfemStudy;

/**
 * Global error measures of one mesh level. `theta` is NaN when the exact
 * error vanishes.
 */
typedef struct SfemErrorSummary {
  uint32_t level;
  size_t dof;
  size_t elements;
  double exact_error;
  double estimated_error;
  double recovered_error;
  double theta;
  double mean_abs_d;
  double sigma_d;
} SfemErrorSummary;

typedef struct SfemRate {
  /**
   * Least-squares log-log slope.
   */
  double slope;
  /**
   * Mean of the rates between consecutive levels.
   */
  double average;
} SfemRate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *sfem_version(void);

/**
 * Copies the message of the last failure on this thread into `buf` and
 * returns the buffer size the full message needs (1 when there is none).
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t sfem_last_error_message(char *buf, size_t len);

/**
 * Leading singularity exponent of a notch with opening angle `alpha`.
 *
 * # Safety
 * `out` must be null or valid for writing.
 */
enum SfemStatus sfem_singularity_eigenvalue(double alpha, enum SfemMode m, double *out);

/**
 * Constant `Q` of the leading eigenfunction of mode `m`.
 *
 * # Safety
 * `out` must be null or valid for writing.
 */
enum SfemStatus sfem_q_constant(double alpha, enum SfemMode m, double *out);

/**
 * Parses and resolves a TOML study configuration.
 *
 * # Safety
 * `toml` must be a NUL-terminated string; `out` must be valid for writing.
 */
enum SfemStatus sfem_config_from_toml(const char *toml, struct SfemConfig **out);

/**
 * Number of studies in the named preset.
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be valid for writing.
 */
enum SfemStatus sfem_preset_study_count(const char *name, size_t *out);

/**
 * Configuration of study `index` of the named preset.
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be valid for writing.
 */
enum SfemStatus sfem_preset_study(const char *name, size_t index, struct SfemConfig **out);

/**
 * Applies a `key.path=value` override. The handle is unchanged on failure.
 *
 * # Safety
 * `config` must be a live handle; `assignment` a NUL-terminated string.
 */
enum SfemStatus sfem_config_set(struct SfemConfig *config, const char *assignment);

/**
 * Writes the resolved configuration as TOML into `buf`; `required` receives
 * the buffer size needed.
 *
 * # Safety
 * `config` must be a live handle; `buf` null or `len` writable bytes;
 * `required` null or valid for writing.
 */
enum SfemStatus sfem_config_to_toml(const struct SfemConfig *config,
                                    char *buf,
                                    size_t len,
                                    size_t *required);

/**
 * # Safety
 * `config` must be null or a handle not freed before.
 */
void sfem_config_free(struct SfemConfig *config);

/**
 * Mesh of `level` for the configured benchmark.
 *
 * # Safety
 * `config` must be a live handle; `out` valid for writing.
 */
enum SfemStatus sfem_mesh_build(const struct SfemConfig *config,
                                uint32_t level,
                                struct SfemMesh **out);

/**
 * Node count, 0 for a null handle.
 *
 * # Safety
 * `mesh` must be null or a live handle.
 */
size_t sfem_mesh_node_count(const struct SfemMesh *mesh);

/**
 * Element count, 0 for a null handle.
 *
 * # Safety
 * `mesh` must be null or a live handle.
 */
size_t sfem_mesh_element_count(const struct SfemMesh *mesh);

/**
 * Coordinates of `node` into `xy[0..2]`.
 *
 * # Safety
 * `mesh` must be a live handle; `xy` must point to 2 writable doubles.
 */
enum SfemStatus sfem_mesh_node(const struct SfemMesh *mesh, size_t node, double *xy);

/**
 * Counter-clockwise node indices of `element` into `nodes[0..4]`.
 *
 * # Safety
 * `mesh` must be a live handle; `nodes` must point to 4 writable `size_t`.
 */
enum SfemStatus sfem_mesh_element(const struct SfemMesh *mesh, size_t element, size_t *nodes);

/**
 * # Safety
 * `mesh` must be null or a handle not freed before.
 */
void sfem_mesh_free(struct SfemMesh *mesh);

/**
 * Solves, recovers and estimates on one level.
 *
 * # Safety
 * `config` must be a live handle; `out` valid for writing.
 */
enum SfemStatus sfem_run_case(const struct SfemConfig *config,
                              uint32_t level,
                              struct SfemCase **out);

/**
 * # Safety
 * `case` must be a live handle; `out` valid for writing.
 */
enum SfemStatus sfem_case_summary(const struct SfemCase *case_, struct SfemErrorSummary *out);

/**
 * Stress intensity factors used for splitting. Fails with
 * `InvalidArgument` when the case was not split.
 *
 * # Safety
 * `case` must be a live handle; `k_i` and `k_ii` valid for writing.
 */
enum SfemStatus sfem_case_gsif(const struct SfemCase *case_, double *k_i, double *k_ii);

/**
 * Per-element `(estimated, exact, recovered)` error norms into `out[0..3]`.
 *
 * # Safety
 * `case` must be a live handle; `out` must point to 3 writable doubles.
 */
enum SfemStatus sfem_case_element_errors(const struct SfemCase *case_, size_t element, double *out);

/**
 * # Safety
 * `case` must be null or a handle not freed before.
 */
void sfem_case_free(struct SfemCase *case_);

/**
 * Runs the convergence study. When a level fails the status reports the
 * failure and `out` still receives the partial study.
 *
 * # Safety
 * `config` must be a live handle; `out` valid for writing.
 */
enum SfemStatus sfem_run_study(const struct SfemConfig *config, struct SfemStudy **out);

/**
 * Completed levels, 0 for a null handle.
 *
 * # Safety
 * `study` must be null or a live handle.
 */
size_t sfem_study_case_count(const struct SfemStudy *study);

/**
 * Summary of the `index`-th level in dof order.
 *
 * # Safety
 * `study` must be a live handle; `out` valid for writing.
 */
enum SfemStatus sfem_study_summary(const struct SfemStudy *study,
                                   size_t index,
                                   struct SfemErrorSummary *out);

/**
 * Convergence rate of `quantity`. Fails with `InvalidArgument` when it is
 * undefined (fewer than two levels or non-positive values).
 *
 * # Safety
 * `study` must be a live handle; `out` valid for writing.
 */
enum SfemStatus sfem_study_rate(const struct SfemStudy *study,
                                enum SfemQuantity quantity,
                                struct SfemRate *out);

/**
 * Writes the report as `<dir>/<study name>.csv` or `.json`.
 *
 * # Safety
 * `study` must be a live handle; `dir` a NUL-terminated path.
 */
enum SfemStatus sfem_study_write(const struct SfemStudy *study,
                                 enum SfemFormat format,
                                 const char *dir);

/**
 * # Safety
 * `study` must be null or a handle not freed before.
 */
void sfem_study_free(struct SfemStudy *study);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SFEM_ZZ_H */
