#ifndef ROADINFER_EXTRACT_H_
#define ROADINFER_EXTRACT_H_

#include "roadinfer/binary_grid.h"
#include "roadinfer/core.h"
#include "roadinfer/raster.h"

namespace roadinfer {

// One-pixel-wide skeleton georeferenced by `spec`.
struct SkeletonMask {
  TileSpec spec;
  BinaryGrid grid;
};

struct CleaningConfig {
  double min_dead_end_len = 15.0;   // meters
  double collapse_edge_len = 10.0;  // meters

  void validate() const;
};

// Binary grid of a Label/Probability raster: pixel set iff value >= threshold.
BinaryGrid to_binary_grid(const RasterTile& tile, double threshold = 0.5);

// Converts a skeleton into a graph. Nodes sit at pixels whose 8-neighbor
// count differs from two (8-adjacent node pixels form one node placed at the
// cluster pixel nearest the cluster centroid); edges are the pixel paths
// between them, with collinear pixel runs merged. Pure cycles get one anchor
// node. Throws InvalidInputError if the skeleton contains a 2x2 block.
RoadGraph vectorize(const SkeletonMask& skeleton);

// Contracts edges shorter than collapse_edge_len whose endpoints both have
// degree >= 3, shortest first, until none remain. The merged node sits at
// the contracted edge's midpoint.
RoadGraph collapse_short_junction_edges(const RoadGraph& graph,
                                        const CleaningConfig& config);

// Removes spurs shorter than min_dead_end_len hanging off a node of
// degree >= 3, until none remain.
RoadGraph prune_dead_ends(const RoadGraph& graph, const CleaningConfig& config);

// Merges the two edges of every degree-2 node into one. A node whose only
// edge is a self-loop is kept as the cycle's anchor.
RoadGraph simplify_degree2(const RoadGraph& graph);

// collapse -> prune -> simplify, the clean-up applied after vectorization.
RoadGraph clean_graph(const RoadGraph& graph, const CleaningConfig& config);

}  // namespace roadinfer

#endif  // ROADINFER_EXTRACT_H_
