#ifndef ENVSYNTH_H
#define ENVSYNTH_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Cells in a grid buffer.
 */
#define ES_GRID_CELLS 900

/**
 * Side length of a grid.
 */
#define ES_GRID_SIZE 30

typedef enum EsStatus {
  ES_STATUS_OK = 0,
  ES_STATUS_NULL_ARGUMENT = 1,
  ES_STATUS_CONFIG = 2,
  ES_STATUS_DATA = 3,
  ES_STATUS_INTERNAL = 4,
  ES_STATUS_PANIC = 5,
  ES_STATUS_INVALID_UTF8 = 6,
} EsStatus;

typedef struct EsEnvSet EsEnvSet;

typedef struct EsGanModel EsGanModel;

typedef struct EsGrid EsGrid;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *es_version(void);

/**
 * Message of the last failed call on this thread, or NULL if none. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *es_last_error_message(void);

/**
 * All-free grid.
 *
 * # Safety
 * `out` must be NULL or valid for writes.
 */
enum EsStatus es_grid_new_empty(struct EsGrid **out);

/**
 * Grid from `len` (= 900) bytes of 0/1. Start and goal cells are forced free.
 *
 * # Safety
 * `cells` must be NULL or point to `len` readable bytes; `out` must be NULL
 * or valid for writes.
 */
enum EsStatus es_grid_from_cells(const uint8_t *cells, size_t len, struct EsGrid **out);

/**
 * Copy the 900 cells into `buf`, which holds `len` bytes.
 *
 * # Safety
 * `grid` must be NULL or a live handle; `buf` must be NULL or valid for
 * `len` byte writes.
 */
enum EsStatus es_grid_cells(const struct EsGrid *grid, uint8_t *buf, size_t len);

/**
 * Occupancy of cell (`col`, `row`), 0 or 1.
 *
 * # Safety
 * `grid` must be NULL or a live handle; `out` must be NULL or valid for writes.
 */
enum EsStatus es_grid_get(const struct EsGrid *grid, size_t col, size_t row, uint8_t *out);

/**
 * Number of cells where `a` and `b` differ.
 *
 * # Safety
 * `a` and `b` must be NULL or live handles; `out` must be NULL or valid for writes.
 */
enum EsStatus es_grid_hamming(const struct EsGrid *a, const struct EsGrid *b, size_t *out);

/**
 * Whether an 8-connected free path joins the start and goal cells.
 *
 * # Safety
 * `grid` must be NULL or a live handle; `out` must be NULL or valid for writes.
 */
enum EsStatus es_grid_is_navigable(const struct EsGrid *grid, bool *out);

/**
 * # Safety
 * `grid` must be NULL or a handle not yet freed.
 */
void es_grid_free(struct EsGrid *grid);

/**
 * Load an environment-set directory written by the pipeline.
 *
 * # Safety
 * `dir` must be NULL or a NUL-terminated string; `out` must be NULL or
 * valid for writes.
 */
enum EsStatus es_envset_load(const char *dir, struct EsEnvSet **out);

/**
 * Write `set` to `dir` in the pipeline's on-disk layout.
 *
 * # Safety
 * `set` must be NULL or a live handle; `dir` must be NULL or a
 * NUL-terminated string.
 */
enum EsStatus es_envset_save(const struct EsEnvSet *set, const char *dir);

/**
 * # Safety
 * `set` must be NULL or a live handle; `out` must be NULL or valid for writes.
 */
enum EsStatus es_envset_len(const struct EsEnvSet *set, size_t *out);

/**
 * Copy of the grid at `index`; free it with `es_grid_free`.
 *
 * # Safety
 * `set` must be NULL or a live handle; `out` must be NULL or valid for writes.
 */
enum EsStatus es_envset_grid(const struct EsEnvSet *set, size_t index, struct EsGrid **out);

/**
 * `count` draws with replacement from `set`.
 *
 * # Safety
 * `set` must be NULL or a live handle; `out` must be NULL or valid for writes.
 */
enum EsStatus es_sample_uniform(const struct EsEnvSet *set,
                                size_t count,
                                uint64_t seed,
                                struct EsEnvSet **out);

/**
 * # Safety
 * `set` must be NULL or a handle not yet freed.
 */
void es_envset_free(struct EsEnvSet *set);

/**
 * Load a GAN checkpoint.
 *
 * # Safety
 * `path` must be NULL or a NUL-terminated string; `out` must be NULL or
 * valid for writes.
 */
enum EsStatus es_gan_load(const char *path, struct EsGanModel **out);

/**
 * Draw `count` navigable environments from the generator.
 *
 * # Safety
 * `model` must be NULL or a live handle; `out` must be NULL or valid for writes.
 */
enum EsStatus es_gan_sample(const struct EsGanModel *model,
                            size_t count,
                            uint64_t seed,
                            struct EsEnvSet **out);

/**
 * # Safety
 * `model` must be NULL or a handle not yet freed.
 */
void es_gan_free(struct EsGanModel *model);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ENVSYNTH_H */
