#ifndef ROADINFER_SYNTH_H_
#define ROADINFER_SYNTH_H_

#include <cstdint>
#include <map>
#include <string_view>
#include <utility>
#include <vector>

#include "roadinfer/core.h"

namespace roadinfer {

enum class Scenario : std::uint8_t { kStraight, kGrid, kOverpass, kIntersection, kTee };

std::string_view to_string(Scenario s);
// Throws InvalidInputError for unknown names.
Scenario scenario_from_string(std::string_view name);

struct ScenarioSpec {
  Scenario name = Scenario::kGrid;
  double extent = 1000.0;     // meters
  double lane_width = 3.5;    // meters
  double block_size = 500.0;  // meters, grid only

  void validate() const;
};

struct NoiseModel {
  double white_sigma = 1.0;                // meters, per axis
  double bias_sigma = 2.0;                 // meters, per axis
  double bias_correlation_length = 500.0;  // meters of travel between bias knots
  double point_spacing = 5.0;              // meters between trace points
  double dropout_prob = 0.0;               // per side, semantic points only

  void validate() const;
};

enum class RoutePolicy : std::uint8_t {
  kAllShortestPaths,
  kPerEdgeShuttle,
  kStraightThroughOnly,
};

std::string_view to_string(RoutePolicy p);
RoutePolicy route_policy_from_string(std::string_view name);

// Ground-truth edge of every trace point, indexed like GnssTrace::points.
struct TraceOracle {
  std::map<TraceId, std::vector<EdgeId>> edges;

  bool empty() const { return edges.empty(); }
};

struct TraceSample {
  std::vector<GnssTrace> traces;
  TraceOracle oracle;
};

// Vertical separation of the upper road in the overpass scenario.
inline constexpr double kOverpassHeight = 6.0;

// Deterministic ground-truth graph of a scenario. All edges have provenance
// GroundTruth. The graph does not depend on `seed`; the parameter keeps the
// generator signatures uniform.
RoadGraph make_ground_truth(const ScenarioSpec& spec, std::uint64_t seed = 0);

// Samples `n_per_route` noisy traces along every route chosen by `policy`.
//
// Routes are shortest paths between every ordered node pair
// (kAllShortestPaths), the subset of those without turns at intermediate
// nodes (kStraightThroughOnly), or single edges driven back and forth
// (kPerEdgeShuttle). Noise is a bias interpolated between independent
// Gaussian knots every bias_correlation_length meters plus white noise.
TraceSample sample_traces(const RoadGraph& gt, int n_per_route,
                          const NoiseModel& noise, RoutePolicy policy,
                          std::uint64_t seed);

// Per-edge shuttle traces with an individual trace count for each edge.
TraceSample sample_edge_traces(const RoadGraph& gt,
                               const std::map<EdgeId, int>& counts,
                               const NoiseModel& noise, std::uint64_t seed);

// Lane markings at +-lane_width/2 and road boundaries at +-lane_width from
// the ground-truth centerline next to each trace point.
std::vector<SemanticPoint> emit_semantic_points(
    const RoadGraph& gt, const std::vector<GnssTrace>& traces,
    const TraceOracle& oracle, const ScenarioSpec& spec,
    const NoiseModel& noise, std::uint64_t seed);

// Everything a scenario run needs, generated in one call.
struct SyntheticFleet {
  RoadGraph ground_truth;
  FleetDataset dataset;
  TraceOracle oracle;
};

SyntheticFleet make_synthetic_fleet(const ScenarioSpec& spec, int n_per_route,
                                    const NoiseModel& noise, RoutePolicy policy,
                                    std::uint64_t seed);

}  // namespace roadinfer

#endif  // ROADINFER_SYNTH_H_
