#ifndef DYNGNN_H
#define DYNGNN_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum DgStatus {
  DG_STATUS_OK = 0,
  DG_STATUS_NULL_POINTER = 1,
  DG_STATUS_INVALID_ARGUMENT = 2,
  DG_STATUS_UNKNOWN_NODE = 3,
  DG_STATUS_DUPLICATE_EDGE = 4,
  DG_STATUS_MISSING_EDGE = 5,
  DG_STATUS_OUT_OF_RANGE = 6,
  DG_STATUS_IO = 7,
  DG_STATUS_BUFFER_TOO_SMALL = 8,
  DG_STATUS_INTERNAL = 9,
  DG_STATUS_PANIC = 10,
} DgStatus;

/**
 * Model family for synthetic construction.
 */
typedef enum DgFlavor {
  DG_FLAVOR_GCN = 0,
  DG_FLAVOR_GIN = 1,
  DG_FLAVOR_SAGE = 2,
} DgFlavor;

typedef enum DgStrategy {
  DG_STRATEGY_AIP = 0,
  DG_STRATEGY_NAIVE = 1,
} DgStrategy;

/**
 * Opaque cost model handle.
 */
typedef struct DgCostModel DgCostModel;

/**
 * Opaque server handle.
 */
typedef struct DgServer DgServer;

/**
 * Parameters for [`dg_server_new_synthetic`].
 */
typedef struct DgSyntheticParams {
  size_t n;
  size_t c;
  enum DgFlavor flavor;
  /**
   * `num_layers + 1` widths: input feature dim then each layer's output.
   */
  const size_t *dims;
  size_t num_layers;
  size_t m;
  enum DgStrategy strategy;
  uint64_t seed;
  /**
   * Logical cost per touched node, in seconds.
   */
  double unit_cost;
} DgSyntheticParams;

/**
 * Timing of one served query.
 */
typedef struct DgQueryResult {
  double latency;
  double staleness;
  size_t touched_nodes;
} DgQueryResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *dg_last_error(void);

/**
 * Builds a server over a synthetic regular graph.
 *
 * # Safety
 * `params.dims` must point to `params.num_layers + 1` values and `out` must be writable.
 */
enum DgStatus dg_server_new_synthetic(struct DgSyntheticParams params, struct DgServer **out);

/**
 * Builds a server from the graph, model, serving and clock sections of a run
 * config file. `auto` serving starts at `M = 0`.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` must be writable.
 */
enum DgStatus dg_server_new_from_config(const char *path, struct DgServer **out);

/**
 * # Safety
 * `server` must come from a constructor here and not be used afterwards.
 */
void dg_server_free(struct DgServer *server);

/**
 * # Safety
 * `server` must be valid; `feature` must point to `len` values.
 */
enum DgStatus dg_update_feature(struct DgServer *server,
                                uint32_t node,
                                const double *feature,
                                size_t len,
                                double time);

/**
 * # Safety
 * `server` must be valid.
 */
enum DgStatus dg_add_edge(struct DgServer *server, uint32_t src, uint32_t dst, double time);

/**
 * # Safety
 * `server` must be valid.
 */
enum DgStatus dg_remove_edge(struct DgServer *server, uint32_t src, uint32_t dst, double time);

/**
 * Writes the layer-`L` embedding of `node` into `out` (capacity `cap`).
 *
 * # Safety
 * `server` must be valid, `out` must hold `cap` values, `result` may be null.
 */
enum DgStatus dg_query(struct DgServer *server,
                       uint32_t node,
                       double issued_at,
                       double *out,
                       size_t cap,
                       struct DgQueryResult *result);

/**
 * # Safety
 * `server` must be valid.
 */
enum DgStatus dg_set_m(struct DgServer *server, size_t m);

/**
 * Current split point, or `usize::MAX` for a null handle.
 *
 * # Safety
 * `server` must be valid or null.
 */
size_t dg_get_m(const struct DgServer *server);

/**
 * Embedding width, or 0 for a null handle.
 *
 * # Safety
 * `server` must be valid or null.
 */
size_t dg_output_dim(const struct DgServer *server);

/**
 * # Safety
 * `path` must be a NUL-terminated string and `out` must be writable.
 */
enum DgStatus dg_cost_model_load(const char *path, struct DgCostModel **out);

/**
 * # Safety
 * `cm` must come from [`dg_cost_model_load`] and not be used afterwards.
 */
void dg_cost_model_free(struct DgCostModel *cm);

/**
 * Split point minimizing predicted work for the given rates and connectivity.
 *
 * # Safety
 * `cm` must be valid and `out` writable.
 */
enum DgStatus dg_choose_m(const struct DgCostModel *cm,
                          double rps_q,
                          double rps_u,
                          double c,
                          size_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DYNGNN_H */
