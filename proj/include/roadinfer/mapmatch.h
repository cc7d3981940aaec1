#ifndef ROADINFER_MAPMATCH_H_
#define ROADINFER_MAPMATCH_H_

#include <cstddef>
#include <map>
#include <optional>
#include <tuple>
#include <vector>

#include "roadinfer/core.h"
#include "roadinfer/geometry.h"

namespace roadinfer {

struct MatchConfig {
  double candidate_radius = 25.0;  // meters
  double emission_sigma = 5.0;     // meters
  double alpha_seg = 1.0;          // weight of segmentation (and GT) edges
  double alpha_gap = 0.3;          // weight of gap-fill edges
  double route_beta = 20.0;        // meters
  double max_route_factor = 3.0;
  std::size_t max_candidates = 8;  // per point, nearest first

  // Throws InvalidInputError unless everything is positive and
  // alpha_gap <= alpha_seg.
  void validate() const;

  // Same settings with alpha_gap = alpha_seg.
  MatchConfig uniform() const;
};

struct MatchResult {
  TraceId trace_id = 0;
  std::vector<std::optional<EdgeId>> assignments;  // one per trace point
  // Arc offset of each point's projection on its assigned edge (NaN for
  // Null). Optional; used to tell which node a run boundary crossed.
  std::vector<double> arc_offsets;
};

// Probability of moving onto `e` at node `v`: alpha(e) over the sum of alpha
// over all edges at v. Throws InvalidInputError if e is not incident to v.
double edge_transition_prob(NodeId v, EdgeId e, const RoadGraph& graph,
                            const MatchConfig& config);

// Scores of the hidden Markov model of one trace. Forbidden transitions are
// -infinity. transition[t][i][j] scores candidate i of point t-1 to
// candidate j of point t (transition[0] is empty).
struct MatchLattice {
  std::vector<std::vector<EdgeCandidate>> candidates;
  std::vector<std::vector<double>> emission;
  std::vector<std::vector<std::vector<double>>> transition;
};

// Most probable candidate index per point. Points without candidates are
// nullopt and split the sequence; so does a point none of whose candidates
// can be reached from the previous point. Each piece is decoded on its own.
std::vector<std::optional<std::size_t>> viterbi_decode(const MatchLattice& lattice);

class MapMatcher {
 public:
  // Keeps its own copy of `graph`. Throws InvalidInputError if the graph has
  // no edges.
  MapMatcher(const RoadGraph& graph, const MatchConfig& config);
  MapMatcher(const MapMatcher&) = delete;
  MapMatcher& operator=(const MapMatcher&) = delete;

  const RoadGraph& graph() const { return graph_; }
  const MatchConfig& config() const { return config_; }
  const EdgeIndex& index() const { return index_; }

  MatchLattice build_lattice(const GnssTrace& trace) const;
  // Throws InvalidInputError for traces with fewer than 2 points.
  MatchResult match(const GnssTrace& trace) const;
  // Results in the order of `traces`.
  std::vector<MatchResult> match_all(const std::vector<GnssTrace>& traces,
                                     int workers = 1) const;

  // Transition log-score between two projected positions, or nullopt when
  // no route within the length limit connects them. `route` receives the graph
  // distance of the best path.
  std::optional<double> transition_score(const EdgeCandidate& from,
                                         const EdgeCandidate& to,
                                         double straight, double* route) const;

 private:
  struct RouteState {
    double cost;
    double dist;
    double logp;
  };
  double route_limit(double straight) const;
  std::map<NodeId, RouteState> routes_from(const EdgeCandidate& from,
                                           double limit) const;
  std::optional<double> finish_route(const EdgeCandidate& from,
                                     const std::map<NodeId, RouteState>& routes,
                                     const EdgeCandidate& to, double straight,
                                     double limit, double* route) const;

  RoadGraph graph_;
  MatchConfig config_;
  EdgeIndex index_;
};

MatchResult match_trace(const GnssTrace& trace, const MapMatcher& matcher);

// Distinct traces with at least one point on each edge.
std::map<EdgeId, int> edge_support(const std::vector<MatchResult>& matches);

// Traversal counts of adjacent edge pairs, keyed by the node they meet at.
class TransitionCounts {
 public:
  using Key = std::tuple<NodeId, EdgeId, EdgeId>;  // node, smaller, larger

  void add(NodeId v, EdgeId a, EdgeId b, int n = 1);
  int count(NodeId v, EdgeId a, EdgeId b) const;
  // Sum over every node shared by a and b.
  int count(EdgeId a, EdgeId b) const;
  const std::map<Key, int>& counts() const { return counts_; }

  // Consecutive runs on edges that share no node (matching artifacts).
  int skipped = 0;

 private:
  std::map<Key, int> counts_;
};

TransitionCounts transition_counts(const std::vector<MatchResult>& matches,
                                   const RoadGraph& graph);

}  // namespace roadinfer

#endif  // ROADINFER_MAPMATCH_H_
