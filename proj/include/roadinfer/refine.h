#ifndef ROADINFER_REFINE_H_
#define ROADINFER_REFINE_H_

#include <vector>

#include "roadinfer/core.h"
#include "roadinfer/extract.h"
#include "roadinfer/mapmatch.h"

namespace roadinfer {

struct GapFillConfig {
  double max_gap_len = 30.0;          // meters, dead end to dead end
  double max_turn_deg = 90.0;
  double extension_probe_len = 30.0;  // meters, dead end to edge

  void validate() const;
};

struct DisambiguationConfig {
  int min_transition_support = 4;

  void validate() const;
};

// Outward unit direction of a dead end, taken over the last `window` meters
// of its edge.
Vec2 terminal_direction(const RoadGraph& graph, NodeId dead_end,
                        double window = 5.0);

// Bridges dead ends with straight GapFill edges, either to another dead end
// or to the first edge hit by the dead end's forward extension. Single pass
// in ascending node id; each node gains at most one edge.
RoadGraph fill_gaps(const RoadGraph& graph, const GapFillConfig& config);

// Drops GapFill edges fewer than min_transition_support traces were matched
// to, then tidies up degree-2 nodes and short spurs.
RoadGraph prune_gap_edges(const RoadGraph& graph,
                          const std::vector<GnssTrace>& traces,
                          const MatchConfig& match,
                          const DisambiguationConfig& config,
                          const CleaningConfig& cleaning, int workers = 1);

// Splits nodes whose incident edges fall into groups no trace moves between
// (stacked roads), then merges the resulting degree-2 nodes. Matching uses
// uniform transition weights whatever `match` says.
RoadGraph disambiguate_intersections(const RoadGraph& graph,
                                     const std::vector<GnssTrace>& traces,
                                     const MatchConfig& match,
                                     const DisambiguationConfig& config,
                                     int workers = 1);

// Groups of incident edges at `v` that the split above would create, first
// group first. A single group means the node stays.
std::vector<std::vector<EdgeId>> transition_groups(const RoadGraph& graph,
                                                   NodeId v,
                                                   const TransitionCounts& counts,
                                                   int min_support);

}  // namespace roadinfer

#endif  // ROADINFER_REFINE_H_
