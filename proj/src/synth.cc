#include "roadinfer/synth.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <string>

#include "roadinfer/error.h"
#include "roadinfer/geometry.h"

namespace roadinfer {
namespace {

// Turns sharper than this at an intermediate node disqualify a route from
// the straight-through policy.
constexpr double kStraightTurnDeg = 30.0;

struct RouteStep {
  EdgeId edge;
  bool forward;  // traversed from node a to node b
};

struct Route {
  std::vector<RouteStep> steps;
};

std::vector<LocalPoint> oriented_polyline(const Edge& e, bool forward) {
  std::vector<LocalPoint> pl = e.polyline;
  if (!forward) std::reverse(pl.begin(), pl.end());
  return pl;
}

// Shortest-path tree from `source`; ties resolve toward lower node ids.
std::map<NodeId, RouteStep> shortest_path_tree(const RoadGraph& g,
                                               NodeId source) {
  std::map<NodeId, double> dist;
  std::map<NodeId, RouteStep> parent;
  using Item = std::pair<double, NodeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  dist[source] = 0.0;
  queue.push({0.0, source});
  while (!queue.empty()) {
    const auto [d, u] = queue.top();
    queue.pop();
    if (d > dist[u]) continue;
    for (EdgeId eid : g.incident_edges(u)) {
      const Edge& e = g.edge(eid);
      if (e.is_self_loop()) continue;
      const NodeId v = e.other(u);
      const double nd = d + g.edge_length(eid);
      const auto it = dist.find(v);
      if (it == dist.end() || nd < it->second) {
        dist[v] = nd;
        parent[v] = {eid, e.a == u};
        queue.push({nd, v});
      }
    }
  }
  return parent;
}

std::vector<Route> shortest_routes(const RoadGraph& g) {
  std::vector<Route> routes;
  for (const auto& [src, p] : g.nodes()) {
    const auto parent = shortest_path_tree(g, src);
    for (const auto& [dst, q] : g.nodes()) {
      if (dst == src || !parent.contains(dst)) continue;
      Route r;
      NodeId cur = dst;
      while (cur != src) {
        const RouteStep step = parent.at(cur);
        r.steps.push_back(step);
        const Edge& e = g.edge(step.edge);
        cur = step.forward ? e.a : e.b;
      }
      std::reverse(r.steps.begin(), r.steps.end());
      routes.push_back(std::move(r));
    }
  }
  return routes;
}

bool is_straight_through(const RoadGraph& g, const Route& r) {
  for (std::size_t i = 1; i < r.steps.size(); ++i) {
    const auto in = oriented_polyline(g.edge(r.steps[i - 1].edge),
                                      r.steps[i - 1].forward);
    const auto out =
        oriented_polyline(g.edge(r.steps[i].edge), r.steps[i].forward);
    const Vec2 din = tangent_at_arc(in, polyline_length(in));
    const Vec2 dout = tangent_at_arc(out, 0.0);
    if (angle_between_deg(din, dout) > kStraightTurnDeg) return false;
  }
  return true;
}

class TraceSampler {
 public:
  TraceSampler(const RoadGraph& g, const NoiseModel& noise, std::uint64_t seed)
      : g_(g), noise_(noise), rng_(seed) {}

  void sample(const Route& route, int count, TraceSample& out) {
    // Concatenate the route geometry and remember where each edge ends.
    std::vector<LocalPoint> geometry;
    std::vector<double> edge_end;
    for (const RouteStep& step : route.steps) {
      auto pl = oriented_polyline(g_.edge(step.edge), step.forward);
      if (!geometry.empty()) pl.erase(pl.begin());
      geometry.insert(geometry.end(), pl.begin(), pl.end());
      edge_end.push_back(polyline_length(geometry));
    }
    const double length = edge_end.back();

    std::vector<double> arcs;
    for (double s = 0.0; s < length - 1e-9; s += noise_.point_spacing) {
      arcs.push_back(s);
    }
    arcs.push_back(length);

    for (int k = 0; k < count; ++k) {
      const std::size_t n_knots =
          static_cast<std::size_t>(
              std::ceil(length / noise_.bias_correlation_length)) + 1;
      std::vector<Vec2> knots(n_knots);
      const double bs = noise_.bias_sigma;
      for (auto& knot : knots) knot = {draw(bs), draw(bs)};
      const double ws = noise_.white_sigma;

      GnssTrace trace;
      trace.trace_id = next_id_++;
      std::vector<EdgeId> truth;
      std::size_t step = 0;
      for (double s : arcs) {
        while (step + 1 < edge_end.size() && s >= edge_end[step]) ++step;
        const double u = s / noise_.bias_correlation_length;
        const std::size_t i0 =
            std::min(static_cast<std::size_t>(u), n_knots - 2);
        const double f = std::min(u - static_cast<double>(i0), 1.0);
        const Vec2 b{knots[i0].x + (knots[i0 + 1].x - knots[i0].x) * f,
                     knots[i0].y + (knots[i0 + 1].y - knots[i0].y) * f};
        LocalPoint p = point_at_arc(geometry, s);
        p.x += b.x + draw(ws);
        p.y += b.y + draw(ws);
        trace.points.push_back(p);
        truth.push_back(route.steps[step].edge);
      }
      out.oracle.edges.emplace(trace.trace_id, std::move(truth));
      out.traces.push_back(std::move(trace));
    }
  }

 private:
  double draw(double sigma) {
    if (sigma <= 0.0) return 0.0;
    return std::normal_distribution<double>(0.0, sigma)(rng_);
  }

  const RoadGraph& g_;
  NoiseModel noise_;
  std::mt19937_64 rng_;
  TraceId next_id_ = 0;
};

}  // namespace

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::kStraight:
      return "straight";
    case Scenario::kGrid:
      return "grid";
    case Scenario::kOverpass:
      return "overpass";
    case Scenario::kIntersection:
      return "intersection";
    case Scenario::kTee:
      return "tee";
  }
  return "grid";
}

Scenario scenario_from_string(std::string_view name) {
  for (Scenario s : {Scenario::kStraight, Scenario::kGrid, Scenario::kOverpass,
                     Scenario::kIntersection, Scenario::kTee}) {
    if (to_string(s) == name) return s;
  }
  throw InvalidInputError("unknown scenario: " + std::string(name));
}

std::string_view to_string(RoutePolicy p) {
  switch (p) {
    case RoutePolicy::kAllShortestPaths:
      return "all_shortest_paths";
    case RoutePolicy::kPerEdgeShuttle:
      return "per_edge_shuttle";
    case RoutePolicy::kStraightThroughOnly:
      return "straight_through_only";
  }
  return "all_shortest_paths";
}

RoutePolicy route_policy_from_string(std::string_view name) {
  for (RoutePolicy p : {RoutePolicy::kAllShortestPaths,
                        RoutePolicy::kPerEdgeShuttle,
                        RoutePolicy::kStraightThroughOnly}) {
    if (to_string(p) == name) return p;
  }
  throw InvalidInputError("unknown route policy: " + std::string(name));
}

void ScenarioSpec::validate() const {
  if (!(extent > 0.0)) throw InvalidInputError("scenario extent must be > 0");
  if (!(lane_width > 0.0)) throw InvalidInputError("lane width must be > 0");
  if (name == Scenario::kGrid && !(block_size > 0.0 && block_size <= extent)) {
    throw InvalidInputError("grid block size must be in (0, extent]");
  }
}

void NoiseModel::validate() const {
  if (!(white_sigma >= 0.0) || !(bias_sigma >= 0.0)) {
    throw InvalidInputError("noise sigmas must be >= 0");
  }
  if (!(bias_correlation_length > 0.0) || !(point_spacing > 0.0)) {
    throw InvalidInputError("correlation length and spacing must be > 0");
  }
  if (!(dropout_prob >= 0.0 && dropout_prob <= 1.0)) {
    throw InvalidInputError("dropout probability must be in [0, 1]");
  }
}

RoadGraph make_ground_truth(const ScenarioSpec& spec, std::uint64_t /*seed*/) {
  spec.validate();
  RoadGraph g;
  const double e = spec.extent;
  const double h = e / 2.0;
  auto road = [&](NodeId a, NodeId b) {
    g.add_edge(a, b, {}, Provenance::kGroundTruth);
  };
  switch (spec.name) {
    case Scenario::kStraight: {
      const NodeId a = g.add_node({0.0, 0.0, 0.0});
      const NodeId b = g.add_node({e, 0.0, 0.0});
      road(a, b);
      break;
    }
    case Scenario::kGrid: {
      const int n = static_cast<int>(std::floor(e / spec.block_size + 1e-9)) + 1;
      auto id = [n](int i, int j) { return NodeId{j * n + i}; };
      for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
          g.add_node(id(i, j), {i * spec.block_size, j * spec.block_size, 0.0});
        }
      }
      for (int j = 0; j < n; ++j) {
        for (int i = 0; i + 1 < n; ++i) road(id(i, j), id(i + 1, j));
      }
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j + 1 < n; ++j) road(id(i, j), id(i, j + 1));
      }
      break;
    }
    case Scenario::kOverpass: {
      const NodeId w = g.add_node({0.0, h, 0.0});
      const NodeId east = g.add_node({e, h, 0.0});
      const NodeId s = g.add_node({h, 0.0, kOverpassHeight});
      const NodeId n = g.add_node({h, e, kOverpassHeight});
      road(w, east);
      road(s, n);
      break;
    }
    case Scenario::kIntersection:
    case Scenario::kTee: {
      const NodeId c = g.add_node({h, h, 0.0});
      const NodeId w = g.add_node({0.0, h, 0.0});
      const NodeId east = g.add_node({e, h, 0.0});
      const NodeId s = g.add_node({h, 0.0, 0.0});
      road(w, c);
      road(c, east);
      road(s, c);
      if (spec.name == Scenario::kIntersection) {
        const NodeId n = g.add_node({h, e, 0.0});
        road(c, n);
      }
      break;
    }
  }
  g.validate();
  return g;
}

TraceSample sample_traces(const RoadGraph& gt, int n_per_route,
                          const NoiseModel& noise, RoutePolicy policy,
                          std::uint64_t seed) {
  if (n_per_route < 0) throw InvalidInputError("n_per_route must be >= 0");
  if (gt.edge_count() == 0) throw InvalidInputError("ground truth has no edges");
  noise.validate();
  if (policy == RoutePolicy::kPerEdgeShuttle) {
    std::map<EdgeId, int> counts;
    for (const auto& [id, e] : gt.edges()) counts[id] = n_per_route;
    return sample_edge_traces(gt, counts, noise, seed);
  }
  TraceSample out;
  if (n_per_route == 0) return out;
  TraceSampler sampler(gt, noise, seed);
  for (const Route& r : shortest_routes(gt)) {
    if (policy == RoutePolicy::kStraightThroughOnly &&
        !is_straight_through(gt, r)) {
      continue;
    }
    sampler.sample(r, n_per_route, out);
  }
  return out;
}

TraceSample sample_edge_traces(const RoadGraph& gt,
                               const std::map<EdgeId, int>& counts,
                               const NoiseModel& noise, std::uint64_t seed) {
  noise.validate();
  TraceSample out;
  TraceSampler sampler(gt, noise, seed);
  for (const auto& [id, count] : counts) {
    if (count < 0) throw InvalidInputError("trace count must be >= 0");
    if (!gt.has_edge(id)) throw NotFoundError("unknown edge in trace counts");
    // Alternate driving direction between consecutive shuttle runs.
    for (int k = 0; k < count; ++k) {
      sampler.sample(Route{{{id, k % 2 == 0}}}, 1, out);
    }
  }
  return out;
}

std::vector<SemanticPoint> emit_semantic_points(
    const RoadGraph& gt, const std::vector<GnssTrace>& traces,
    const TraceOracle& oracle, const ScenarioSpec& spec,
    const NoiseModel& noise, std::uint64_t seed) {
  spec.validate();
  noise.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double jitter_sigma = noise.white_sigma / 2.0;
  std::normal_distribution<double> jitter(0.0, jitter_sigma > 0.0 ? jitter_sigma : 1.0);
  auto draw_jitter = [&] { return jitter_sigma > 0.0 ? jitter(rng) : 0.0; };

  std::vector<SemanticPoint> out;
  for (const GnssTrace& trace : traces) {
    const auto it = oracle.edges.find(trace.trace_id);
    if (it == oracle.edges.end() || it->second.size() != trace.points.size()) {
      throw InvalidInputError("oracle does not cover trace " +
                              std::to_string(trace.trace_id));
    }
    for (std::size_t i = 0; i < trace.points.size(); ++i) {
      const auto& polyline = gt.edge(it->second[i]).polyline;
      const PolylineProjection proj =
          project_onto_polyline(polyline, trace.points[i]);
      const Vec2 t = tangent_at_arc(polyline, proj.arc_offset);
      const Vec2 n{-t.y, t.x};
      for (double side : {1.0, -1.0}) {
        if (!(unit(rng) < 1.0 - noise.dropout_prob)) continue;
        for (const auto& [cls, offset] :
             {std::pair{SemanticClass::kRoadBoundary, spec.lane_width},
              std::pair{SemanticClass::kLaneMarking, spec.lane_width / 2.0}}) {
          LocalPoint p = proj.point;
          p.x += side * offset * n.x + draw_jitter();
          p.y += side * offset * n.y + draw_jitter();
          out.push_back({p, cls});
        }
      }
    }
  }
  return out;
}

SyntheticFleet make_synthetic_fleet(const ScenarioSpec& spec, int n_per_route,
                                    const NoiseModel& noise, RoutePolicy policy,
                                    std::uint64_t seed) {
  SyntheticFleet fleet;
  fleet.ground_truth = make_ground_truth(spec, seed);
  TraceSample sample =
      sample_traces(fleet.ground_truth, n_per_route, noise, policy, seed);
  fleet.dataset.points =
      emit_semantic_points(fleet.ground_truth, sample.traces, sample.oracle,
                           spec, noise, seed ^ 0x9e3779b97f4a7c15ULL);
  fleet.dataset.traces = std::move(sample.traces);
  fleet.oracle = std::move(sample.oracle);
  return fleet;
}

}  // namespace roadinfer
