#ifndef SUPERFLOW_H
#define SUPERFLOW_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SfDir {
  SF_DIR_LEFT = 0,
  SF_DIR_RIGHT = 1,
  SF_DIR_UP = 2,
  SF_DIR_DOWN = 3,
} SfDir;

typedef enum SfStatus {
  SF_STATUS_OK = 0,
  SF_STATUS_NULL_POINTER = 1,
  SF_STATUS_INVALID_ARGUMENT = 2,
  SF_STATUS_ADMISSION = 3,
  SF_STATUS_SOLVER_FAILURE = 4,
  SF_STATUS_LAYOUT_MISMATCH = 5,
  SF_STATUS_BOTH_EMPTY = 6,
  SF_STATUS_PANIC = 7,
} SfStatus;

/**
 * A cut: flow value plus labels.
 */
typedef struct SfCut SfCut;

/**
 * A grid graph.
 */
typedef struct SfGraph SfGraph;

/**
 * How a composite graph splits back into its constituents.
 */
typedef struct SfLayout SfLayout;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * Valid until the next `sf_*` call on the same thread.
 */
const char *sf_last_error(void);

/**
 * Creates a `width x height` graph with every capacity zero.
 *
 * # Safety
 * `out` must be valid for writing one pointer.
 */
enum SfStatus sf_graph_new(uint32_t width, uint32_t height, struct SfGraph **out);

/**
 * Builds a graph from row-major arrays: `src` and `snk` of `width*height`
 * entries, `nbr` of `4*width*height` entries ordered left, right, up, down
 * per pixel. The graph is admitted before it is returned.
 *
 * # Safety
 * Each array must hold the stated number of elements; `out` must be valid
 * for writing one pointer.
 */
enum SfStatus sf_graph_from_arrays(uint32_t width,
                                   uint32_t height,
                                   const int32_t *src,
                                   const int32_t *snk,
                                   const int32_t *nbr,
                                   struct SfGraph **out);

/**
 * # Safety
 * `graph` must come from this library and not be used afterwards.
 */
void sf_graph_free(struct SfGraph *graph);

/**
 * # Safety
 * `graph` must be a live handle or null.
 */
uint32_t sf_graph_width(const struct SfGraph *graph);

/**
 * # Safety
 * `graph` must be a live handle or null.
 */
uint32_t sf_graph_height(const struct SfGraph *graph);

/**
 * Sets the source and sink capacities of `pixel`.
 *
 * # Safety
 * `graph` must be a live handle.
 */
enum SfStatus sf_graph_set_terminal(struct SfGraph *graph,
                                    uint32_t pixel,
                                    int32_t src,
                                    int32_t snk);

/**
 * Sets the capacity of the edge leaving `pixel` towards `dir`, one of the
 * [`SfDir`] values.
 *
 * # Safety
 * `graph` must be a live handle.
 */
enum SfStatus sf_graph_set_edge(struct SfGraph *graph, uint32_t pixel, uint32_t dir, int32_t cap);

/**
 * Maximum flow and minimal source-side cut by push-relabel.
 *
 * # Safety
 * `graph` must be a live handle; `out` valid for writing one pointer.
 */
enum SfStatus sf_maxflow(const struct SfGraph *graph, struct SfCut **out);

/**
 * Same result as [`sf_maxflow`] from the augmenting-path reference solver.
 *
 * # Safety
 * As for [`sf_maxflow`].
 */
enum SfStatus sf_maxflow_reference(const struct SfGraph *graph, struct SfCut **out);

/**
 * # Safety
 * `cut` must be a live handle or null.
 */
uint64_t sf_cut_flow(const struct SfCut *cut);

/**
 * # Safety
 * `cut` must be a live handle or null.
 */
size_t sf_cut_len(const struct SfCut *cut);

/**
 * Copies the labels into `labels`, which must hold exactly
 * `sf_cut_len(cut)` bytes.
 *
 * # Safety
 * `cut` must be a live handle and `labels` valid for `len` bytes.
 */
enum SfStatus sf_cut_labels(const struct SfCut *cut, uint8_t *labels, size_t len);

/**
 * # Safety
 * `cut` must come from this library and not be used afterwards.
 */
void sf_cut_free(struct SfCut *cut);

/**
 * Cost of the cut described by `labels` (`len` must equal the pixel count).
 *
 * # Safety
 * `graph` must be a live handle, `labels` valid for `len` bytes and
 * `cost` valid for writing.
 */
enum SfStatus sf_cut_cost(const struct SfGraph *graph,
                          const uint8_t *labels,
                          size_t len,
                          uint64_t *cost);

/**
 * Whether the swap heuristic would exchange source and sink.
 *
 * # Safety
 * `graph` must be a live handle and `swap` valid for writing.
 */
enum SfStatus sf_swap_decision(const struct SfGraph *graph, bool *swap);

/**
 * A new graph with terminals exchanged and edges reversed.
 *
 * # Safety
 * `graph` must be a live handle; `out` valid for writing one pointer.
 */
enum SfStatus sf_apply_swap(const struct SfGraph *graph, struct SfGraph **out);

/**
 * Knits `count` graphs side by side with zero bridge columns. With
 * `pad_heights` shorter graphs are padded with zero rows; otherwise all
 * heights must match. Segments are unswapped.
 *
 * # Safety
 * `graphs` must point to `count` live handles; `out_graph` and
 * `out_layout` valid for writing one pointer each.
 */
enum SfStatus sf_join(const struct SfGraph *const *graphs,
                      size_t count,
                      bool pad_heights,
                      struct SfGraph **out_graph,
                      struct SfLayout **out_layout);

/**
 * # Safety
 * `layout` must be a live handle or null.
 */
size_t sf_layout_len(const struct SfLayout *layout);

/**
 * # Safety
 * `layout` must come from this library and not be used afterwards.
 */
void sf_layout_free(struct SfLayout *layout);

/**
 * Solves a composite graph so that swapped segments decode to canonical
 * labels.
 *
 * # Safety
 * Handles must be live; `out` valid for writing one pointer.
 */
enum SfStatus sf_maxflow_composite(const struct SfLayout *layout,
                                   const struct SfGraph *composite,
                                   struct SfCut **out);

/**
 * Decodes a composite cut into one cut per segment. `cuts` must have room
 * for `sf_layout_len(layout)` handles, each released with `sf_cut_free`.
 *
 * # Safety
 * Handles must be live and `cuts` valid for `len` pointers.
 */
enum SfStatus sf_split(const struct SfLayout *layout,
                       const struct SfGraph *composite,
                       const struct SfCut *cut,
                       struct SfCut **cuts,
                       size_t len);

/**
 * Intersection over union of two masks as an exact reduced fraction.
 *
 * # Safety
 * `s` and `g` must be valid for `len` bytes; `num` and `den` for writing.
 */
enum SfStatus sf_overlap(const uint8_t *s,
                         const uint8_t *g,
                         size_t len,
                         uint64_t *num,
                         uint64_t *den);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SUPERFLOW_H */
