#ifndef ROADINFER_METRICS_H_
#define ROADINFER_METRICS_H_

#include <cstddef>
#include <vector>

#include "roadinfer/core.h"
#include "roadinfer/raster.h"

namespace roadinfer {

struct MetricReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t matched_proposal = 0;
  std::size_t total_proposal = 0;
  std::size_t matched_gt = 0;
  std::size_t total_gt = 0;
};

struct GeoConfig {
  double interpolation_interval = 11.0;  // meters
  double match_radius = 6.0;             // meters

  void validate() const;
};

struct ItopoConfig {
  GeoConfig geo;
  double node_match_radius = 6.0;  // meters
  double traversal_radius = 30.0;  // meters

  void validate() const;
};

struct GraphVertex {
  LocalPoint point;
  EdgeId edge{};
};

// Points every `interval` meters along each edge plus its far end; a node
// shared by several edges contributes one vertex.
std::vector<GraphVertex> interpolate_vertices(const RoadGraph& graph,
                                              double interval);

// Same sampling for a single polyline.
std::vector<LocalPoint> interpolate_polyline(const std::vector<LocalPoint>& polyline,
                                             double interval);

// Greedy one-to-one matching of two point sets, closest pairs first, within
// `radius`. Returns the number of matched pairs.
std::size_t match_vertices(const std::vector<LocalPoint>& a,
                           const std::vector<LocalPoint>& b, double radius);

MetricReport geo_metric(const RoadGraph& proposal, const RoadGraph& gt,
                        const GeoConfig& config);

MetricReport itopo_metric(const RoadGraph& proposal, const RoadGraph& gt,
                          const ItopoConfig& config);

// Pixel precision and recall after 2x2 dilation of both masks.
MetricReport soft_f1(const RasterTile& pred, const RasterTile& gt);

// Fills f1 (and precision/recall from the counts) following the empty-set
// conventions: nothing on either side scores 1, one empty side scores 0.
MetricReport finish_report(std::size_t matched_proposal, std::size_t total_proposal,
                           std::size_t matched_gt, std::size_t total_gt);

}  // namespace roadinfer

#endif  // ROADINFER_METRICS_H_
