#ifndef ROADINFER_SEGMENT_H_
#define ROADINFER_SEGMENT_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "roadinfer/binary_grid.h"
#include "roadinfer/core.h"
#include "roadinfer/mapmatch.h"
#include "roadinfer/raster.h"

namespace roadinfer {

enum class SegmenterBackend : std::uint8_t { kKdeBaseline, kExternalMask };

std::string_view to_string(SegmenterBackend b);
SegmenterBackend segmenter_backend_from_string(std::string_view s);

struct SegmenterConfig {
  SegmenterBackend backend = SegmenterBackend::kKdeBaseline;
  double kde_sigma_px = 3.0;
  // Blurred trace density a pixel needs to be road, in the units of the
  // input channel (log10(count + 1) in the pipeline). Picked by grid search
  // on the synthetic grid scenario, see tools/tune_kde.cc.
  double kde_threshold = 0.2;
  double binarize_threshold = 0.5;
  // Raster file per tile; {tile_x} and {tile_y} are replaced by the tile
  // grid position.
  std::string external_mask_path_template;

  void validate() const;
};

struct LabelConfig {
  int min_trace_support = 4;
  int centerline_thickness_px = 1;

  void validate() const;
};

struct CpLossConfig {
  double sigma = 100.0;
  double binarize_threshold = 0.5;
  double epsilon = 1e-7;

  void validate() const;
};

struct CpLoss {
  double total = 0.0;
  double bce = 0.0;
  double dice = 0.0;
  double connectivity_penalty = 0.0;
};

// Separable Gaussian blur with a kernel radius of ceil(3 sigma) pixels and
// zero padding outside the tile.
RasterTile gaussian_blur(const RasterTile& tile, double sigma_px);

// Road probability of one tile from its three co-registered input rasters.
// The kernel-density backend only looks at `trace_density`.
RasterTile segment_tile(const SegmenterConfig& config,
                        const RasterTile& trace_density,
                        const RasterTile& lane_marking,
                        const RasterTile& road_boundary,
                        TileIndex index = {});

// Expands {tile_x} and {tile_y} in `path_template`.
std::string external_mask_path(const std::string& path_template, TileIndex index);

// Label raster of the ground-truth edges that at least min_trace_support
// distinct traces were matched to. `matcher` must be built over `gt`.
RasterTile make_labels(const RoadGraph& gt, const std::vector<GnssTrace>& traces,
                       const MapMatcher& matcher, const TileSpec& spec,
                       const LabelConfig& config, int workers = 1);

// Rasterizes the given edges of `graph` into a Label tile.
RasterTile rasterize_edges(const RoadGraph& graph, const std::vector<EdgeId>& edges,
                           const TileSpec& spec, int thickness_px = 1);

// Label tile with 1 where p >= threshold.
RasterTile binarize(const RasterTile& mask, double threshold);

// Pixels where one skeleton leaves the 2x2 dilation of the other. Inputs are
// binary masks; both are thinned with Guo-Hall first.
BinaryGrid skeleton_mismatch(const BinaryGrid& pred, const BinaryGrid& label);

CpLoss cp_loss(const RasterTile& pred, const RasterTile& label,
               const CpLossConfig& config);

}  // namespace roadinfer

#endif  // ROADINFER_SEGMENT_H_
