#ifndef TRANSPROX_H
#define TRANSPROX_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TpStatus {
  TP_STATUS_OK = 0,
  TP_STATUS_NULL_POINTER = 1,
  TP_STATUS_INVALID_ARGUMENT = 2,
  TP_STATUS_IO = 3,
  TP_STATUS_PARSE = 4,
  TP_STATUS_OUT_OF_RANGE = 5,
  TP_STATUS_INTERNAL = 6,
} TpStatus;

typedef struct TpEmbedding TpEmbedding;

/**
 * A loaded graph together with its original node ids.
 */
typedef struct TpGraph TpGraph;

/**
 * Embedding parameters; start from [`tp_config_default`].
 */
typedef struct TpConfig {
  double alpha;
  double eps;
  size_t dim;
  uint64_t seed;
  size_t svd_oversample;
  size_t svd_power_iters;
} TpConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer is
 * valid until the next call into this library from the same thread.
 */
const char *tp_last_error(void);

struct TpConfig tp_config_default(void);

/**
 * Loads a whitespace-separated edge list. Node ids are remapped to
 * `0..n` in ascending order of the original ids.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum TpStatus tp_graph_load(const char *path, bool directed, struct TpGraph **out);

/**
 * Builds a graph on nodes `0..n` from `m` arcs `src[i] -> dst[i]`.
 *
 * # Safety
 * `src` and `dst` must each point to `m` readable values (may be null when
 * `m == 0`); `out` must be writable.
 */
enum TpStatus tp_graph_from_edges(size_t n,
                                  const uint32_t *src,
                                  const uint32_t *dst,
                                  size_t m,
                                  bool directed,
                                  struct TpGraph **out);

/**
 * # Safety
 * `graph` must be null or a live handle from this library.
 */
size_t tp_graph_node_count(const struct TpGraph *graph);

/**
 * Number of arcs; an undirected edge counts twice.
 *
 * # Safety
 * `graph` must be null or a live handle from this library.
 */
size_t tp_graph_edge_count(const struct TpGraph *graph);

/**
 * Original id of dense node `node`.
 *
 * # Safety
 * `graph` must be a live handle; `out` must be writable.
 */
enum TpStatus tp_graph_original_id(const struct TpGraph *graph, size_t node, uint64_t *out);

/**
 * # Safety
 * `graph` must be null or a handle not yet freed.
 */
void tp_graph_free(struct TpGraph *graph);

/**
 * Backward push towards `target`; writes `pi(u, target)` for every node
 * into `out[0..n]`.
 *
 * # Safety
 * `graph` must be a live handle; `out` must hold `len` writable doubles.
 */
enum TpStatus tp_backward_push(const struct TpGraph *graph,
                               size_t target,
                               double alpha,
                               double r_max,
                               double *out,
                               size_t len);

/**
 * Runs the full embedding pipeline.
 *
 * # Safety
 * `graph` and `config` must be valid pointers; `out` must be writable.
 */
enum TpStatus tp_embed(const struct TpGraph *graph,
                       const struct TpConfig *config,
                       struct TpEmbedding **out);

/**
 * # Safety
 * `emb` must be null or a live handle.
 */
size_t tp_embedding_dim(const struct TpEmbedding *emb);

/**
 * # Safety
 * `emb` must be null or a live handle.
 */
size_t tp_embedding_node_count(const struct TpEmbedding *emb);

/**
 * Inner product of the source vector of `u` and the target vector of `v`.
 *
 * # Safety
 * `emb` must be a live handle; `out` must be writable.
 */
enum TpStatus tp_embedding_score(const struct TpEmbedding *emb, size_t u, size_t v, double *out);

/**
 * Copies the source vectors, row-major `n x dim`, into `out`.
 *
 * # Safety
 * `emb` must be a live handle; `out` must hold `len` writable doubles.
 */
enum TpStatus tp_embedding_copy_source(const struct TpEmbedding *emb, double *out, size_t len);

/**
 * Copies the target vectors, row-major `n x dim`, into `out`.
 *
 * # Safety
 * `emb` must be a live handle; `out` must hold `len` writable doubles.
 */
enum TpStatus tp_embedding_copy_target(const struct TpEmbedding *emb, double *out, size_t len);

/**
 * Writes the embedding in the text format read by the command-line tool,
 * labelling rows with the original ids of `graph`.
 *
 * # Safety
 * `emb` and `graph` must be live handles; `path` a NUL-terminated string.
 */
enum TpStatus tp_embedding_write(const struct TpEmbedding *emb,
                                 const struct TpGraph *graph,
                                 const char *path);

/**
 * Share of true arcs among the `m` best-scored pairs, `m` being the arc count.
 *
 * # Safety
 * `graph` and `emb` must be live handles; `out` must be writable.
 */
enum TpStatus tp_reconstruction_precision(const struct TpGraph *graph,
                                          const struct TpEmbedding *emb,
                                          double *out);

/**
 * # Safety
 * `emb` must be null or a handle not yet freed.
 */
void tp_embedding_free(struct TpEmbedding *emb);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TRANSPROX_H */
