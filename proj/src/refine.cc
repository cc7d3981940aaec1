#include "roadinfer/refine.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <set>

#include "roadinfer/error.h"
#include "roadinfer/geometry.h"

namespace roadinfer {
namespace {

// Ray hits closer than this to an edge's end node attach to that node.
constexpr double kSnapToNode = 1.0;

struct RayHit {
  EdgeId edge{};
  double distance = std::numeric_limits<double>::infinity();
  LocalPoint point;
};

std::optional<RayHit> cast_ray(const RoadGraph& g, const LocalPoint& origin,
                               const Vec2& dir, double length, EdgeId skip) {
  const Vec2 r{dir.x * length, dir.y * length};
  std::optional<RayHit> best;
  for (const auto& [id, e] : g.edges()) {
    if (id == skip) continue;
    for (std::size_t i = 0; i + 1 < e.polyline.size(); ++i) {
      const LocalPoint& q = e.polyline[i];
      const auto t = segment_intersection(origin, r, q, e.polyline[i + 1] - q);
      if (!t || *t * length <= 1e-6) continue;
      const double d = *t * length;
      if (!best || d < best->distance) {
        best = RayHit{id, d, {origin.x + r.x * *t, origin.y + r.y * *t, 0.0}};
      }
    }
  }
  return best;
}

int find(std::vector<int>& parent, int i) {
  while (parent[i] != i) i = parent[i] = parent[parent[i]];
  return i;
}

}  // namespace

void GapFillConfig::validate() const {
  if (!(max_gap_len > 0.0)) throw InvalidInputError("max_gap_len must be > 0");
  if (!(max_turn_deg > 0.0 && max_turn_deg <= 180.0)) {
    throw InvalidInputError("max_turn_deg must lie in (0, 180]");
  }
  if (!(extension_probe_len > 0.0)) {
    throw InvalidInputError("extension_probe_len must be > 0");
  }
}

void DisambiguationConfig::validate() const {
  if (min_transition_support < 1) {
    throw InvalidInputError("min_transition_support must be >= 1");
  }
}

Vec2 terminal_direction(const RoadGraph& graph, NodeId dead_end, double window) {
  const auto& inc = graph.incident_edges(dead_end);
  if (inc.size() != 1) throw InvalidInputError("node is not a dead end");
  const Edge& e = graph.edge(inc.front());
  const double len = graph.edge_length(inc.front());
  const double back = std::min(window, len);
  const LocalPoint tip = graph.node(dead_end);
  const LocalPoint inner =
      point_at_arc(e.polyline, e.a == dead_end ? back : len - back);
  const Vec2 d = tip - inner;
  const double n = norm(d);
  return n > 0.0 ? Vec2{d.x / n, d.y / n} : Vec2{0.0, 0.0};
}

RoadGraph fill_gaps(const RoadGraph& graph, const GapFillConfig& config) {
  config.validate();
  RoadGraph g = graph;
  std::vector<NodeId> dead_ends;
  for (const auto& [id, p] : g.nodes()) {
    if (g.degree(id) == 1) dead_ends.push_back(id);
  }
  std::set<NodeId> used;

  for (NodeId v : dead_ends) {
    if (used.contains(v) || g.degree(v) != 1) continue;
    const LocalPoint pv = g.node(v);
    const Vec2 dir = terminal_direction(g, v);
    const EdgeId own = g.incident_edges(v).front();

    // Nearest compatible dead end.
    std::optional<NodeId> peer;
    double peer_len = std::numeric_limits<double>::infinity();
    for (NodeId u : dead_ends) {
      if (u == v || used.contains(u) || g.degree(u) != 1) continue;
      if (!g.edges_between(v, u).empty()) continue;
      const LocalPoint pu = g.node(u);
      const double len = distance_xy(pv, pu);
      if (!(len < config.max_gap_len) || len <= 0.0 || len >= peer_len) continue;
      if (angle_between_deg(dir, pu - pv) > config.max_turn_deg) continue;
      if (angle_between_deg(terminal_direction(g, u), pv - pu) > config.max_turn_deg) {
        continue;
      }
      peer = u;
      peer_len = len;
    }

    const auto hit = norm(dir) > 0.0
                         ? cast_ray(g, pv, dir, config.extension_probe_len, own)
                         : std::nullopt;

    if (peer && (!hit || peer_len <= hit->distance)) {
      g.add_edge(v, *peer, {}, Provenance::kGapFill);
      used.insert(v);
      used.insert(*peer);
      continue;
    }
    if (!hit) continue;

    // Attach to the hit edge, splitting it unless the hit is at a node.
    const Edge target = g.edge(hit->edge);
    // Snapping must not stretch the new edge past the probe length.
    auto snaps_to = [&](NodeId n) {
      return distance_xy(hit->point, g.node(n)) <= kSnapToNode &&
             distance_xy(pv, g.node(n)) <= config.extension_probe_len;
    };
    NodeId joint;
    if (snaps_to(target.a)) {
      joint = target.a;
    } else if (snaps_to(target.b)) {
      joint = target.b;
    } else {
      const double len = g.edge_length(hit->edge);
      const double s = project_onto_polyline(target.polyline, hit->point).arc_offset;
      LocalPoint at = point_at_arc(target.polyline, s);
      joint = g.add_node(at);
      auto first = sub_polyline(target.polyline, 0.0, s);
      auto second = sub_polyline(target.polyline, s, len);
      g.remove_edge(hit->edge);
      g.add_edge(hit->edge, target.a, joint, std::move(first), target.provenance);
      g.add_edge(joint, target.b, std::move(second), target.provenance);
    }
    if (joint == v || distance_xy(pv, g.node(joint)) <= 0.0) continue;
    g.add_edge(v, joint, {}, Provenance::kGapFill);
    used.insert(v);
    used.insert(joint);
  }
  g.validate();
  return g;
}

RoadGraph prune_gap_edges(const RoadGraph& graph,
                          const std::vector<GnssTrace>& traces,
                          const MatchConfig& match,
                          const DisambiguationConfig& config,
                          const CleaningConfig& cleaning, int workers) {
  config.validate();
  RoadGraph g = graph;
  bool any_gap = false;
  for (const auto& [id, e] : g.edges()) any_gap |= e.provenance == Provenance::kGapFill;
  if (!any_gap) return g;

  std::map<EdgeId, int> support;
  if (!traces.empty()) {
    const MapMatcher matcher(g, match);
    support = edge_support(matcher.match_all(traces, workers));
  }
  std::vector<EdgeId> doomed;
  for (const auto& [id, e] : g.edges()) {
    if (e.provenance != Provenance::kGapFill) continue;
    const auto it = support.find(id);
    if (it == support.end() || it->second < config.min_transition_support) {
      doomed.push_back(id);
    }
  }
  for (EdgeId id : doomed) g.remove_edge(id);
  g.drop_isolated_nodes();
  g = simplify_degree2(g);
  g = prune_dead_ends(g, cleaning);
  return simplify_degree2(g);
}

std::vector<std::vector<EdgeId>> transition_groups(const RoadGraph& graph,
                                                   NodeId v,
                                                   const TransitionCounts& counts,
                                                   int min_support) {
  const std::vector<EdgeId>& inc = graph.incident_edges(v);
  const int n = static_cast<int>(inc.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  bool any = false;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (counts.count(v, inc[i], inc[j]) >= min_support) {
        parent[find(parent, i)] = find(parent, j);
        any = true;
      }
    }
  }
  if (!any) return {inc};

  // Components in order of their smallest edge (inc is ascending).
  std::vector<std::vector<EdgeId>> groups;
  std::map<int, std::size_t> slot;
  for (int i = 0; i < n; ++i) {
    const int root = find(parent, i);
    auto [it, fresh] = slot.emplace(root, groups.size());
    if (fresh) groups.emplace_back();
    groups[it->second].push_back(inc[i]);
  }

  // Edges without any valid transition join the largest group; ties go to
  // the group listed first.
  std::size_t largest = 0;
  for (std::size_t k = 1; k < groups.size(); ++k) {
    if (groups[k].size() > groups[largest].size()) largest = k;
  }
  std::vector<std::vector<EdgeId>> merged;
  std::vector<EdgeId> strays;
  for (std::size_t k = 0; k < groups.size(); ++k) {
    if (groups[k].size() == 1 && k != largest) {
      strays.push_back(groups[k].front());
    }
  }
  for (std::size_t k = 0; k < groups.size(); ++k) {
    if (groups[k].size() == 1 && k != largest) continue;
    merged.push_back(groups[k]);
    if (k == largest) {
      merged.back().insert(merged.back().end(), strays.begin(), strays.end());
      std::sort(merged.back().begin(), merged.back().end());
    }
  }
  std::sort(merged.begin(), merged.end());
  return merged;
}

RoadGraph disambiguate_intersections(const RoadGraph& graph,
                                     const std::vector<GnssTrace>& traces,
                                     const MatchConfig& match,
                                     const DisambiguationConfig& config,
                                     int workers) {
  config.validate();
  RoadGraph g = graph;
  if (g.edge_count() == 0 || traces.empty()) return simplify_degree2(g);

  const MapMatcher matcher(g, match.uniform());
  const TransitionCounts counts =
      transition_counts(matcher.match_all(traces, workers), g);

  std::vector<NodeId> junctions;
  for (const auto& [id, p] : g.nodes()) {
    if (g.degree(id) >= 3) junctions.push_back(id);
  }
  for (NodeId v : junctions) {
    const auto groups =
        transition_groups(g, v, counts, config.min_transition_support);
    if (groups.size() < 2) continue;
    const LocalPoint at = g.node(v);
    for (std::size_t k = 1; k < groups.size(); ++k) {
      const NodeId twin = g.add_node(at);
      for (EdgeId e : groups[k]) {
        const bool loop = g.edge(e).is_self_loop();
        g.reattach_edge_end(e, v, twin);
        if (loop) g.reattach_edge_end(e, v, twin);
      }
    }
  }
  g.validate();
  return simplify_degree2(g);
}

}  // namespace roadinfer
