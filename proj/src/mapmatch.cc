#include "roadinfer/mapmatch.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <utility>

#include "roadinfer/error.h"
#include "roadinfer/parallel.h"

namespace roadinfer {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTieTolerance = 1e-9;

double alpha_of(const Edge& e, const MatchConfig& config) {
  return e.provenance == Provenance::kGapFill ? config.alpha_gap : config.alpha_seg;
}

// Arc distance from offset `s` on edge `e` to its end node `v`.
double offset_to_node(const Edge& e, double length, double s, NodeId v) {
  double d = kInf;
  if (e.a == v) d = std::min(d, s);
  if (e.b == v) d = std::min(d, length - s);
  return d;
}

}  // namespace

void MatchConfig::validate() const {
  if (!(candidate_radius > 0.0) || !(emission_sigma > 0.0) ||
      !(alpha_seg > 0.0) || !(alpha_gap > 0.0) || !(route_beta > 0.0) ||
      !(max_route_factor > 0.0) || max_candidates == 0) {
    throw InvalidInputError("match parameters must be positive");
  }
  if (alpha_gap > alpha_seg) {
    throw InvalidInputError("alpha_gap must not exceed alpha_seg");
  }
}

MatchConfig MatchConfig::uniform() const {
  MatchConfig c = *this;
  c.alpha_gap = c.alpha_seg;
  return c;
}

double edge_transition_prob(NodeId v, EdgeId e, const RoadGraph& graph,
                            const MatchConfig& config) {
  const auto& incident = graph.incident_edges(v);
  if (!std::binary_search(incident.begin(), incident.end(), e)) {
    throw InvalidInputError("edge " + std::to_string(to_int(e)) +
                            " is not incident to node " +
                            std::to_string(to_int(v)));
  }
  double total = 0.0;
  for (EdgeId f : incident) total += alpha_of(graph.edge(f), config);
  return alpha_of(graph.edge(e), config) / total;
}

std::vector<std::optional<std::size_t>> viterbi_decode(const MatchLattice& lattice) {
  const std::size_t n = lattice.candidates.size();
  std::vector<std::optional<std::size_t>> out(n);
  std::vector<std::vector<double>> score(n);
  std::vector<std::vector<std::size_t>> back(n);
  std::vector<bool> starts(n, false);

  for (std::size_t t = 0; t < n; ++t) {
    const auto& cands = lattice.candidates[t];
    const std::size_t k = cands.size();
    score[t].assign(k, -kInf);
    back[t].assign(k, 0);
    if (k == 0) continue;
    const bool chained = t > 0 && !lattice.candidates[t - 1].empty();
    bool reachable = false;
    if (chained) {
      const auto& prev = score[t - 1];
      for (std::size_t j = 0; j < k; ++j) {
        double best = -kInf;
        std::size_t arg = 0;
        bool found = false;
        for (std::size_t i = 0; i < prev.size(); ++i) {
          const double tr = lattice.transition[t][i][j];
          if (prev[i] == -kInf || tr == -kInf) continue;
          const double v = prev[i] + tr;
          // On a numerical tie keep the predecessor on the same edge, so a
          // point sitting exactly on a node goes with the edge driven next.
          const bool same = lattice.candidates[t - 1][i].edge == cands[j].edge;
          const bool arg_same =
              found && lattice.candidates[t - 1][arg].edge == cands[j].edge;
          if (!found || v > best + kTieTolerance ||
              (v >= best - kTieTolerance && same && !arg_same)) {
            best = v;
            arg = i;
            found = true;
          }
        }
        if (found) {
          score[t][j] = best + lattice.emission[t][j];
          back[t][j] = arg;
          reachable = true;
        }
      }
    }
    if (!reachable) {
      starts[t] = true;
      for (std::size_t j = 0; j < k; ++j) score[t][j] = lattice.emission[t][j];
    }
  }

  // Backtrack each piece from its last point.
  std::size_t t = n;
  while (t > 0) {
    --t;
    if (lattice.candidates[t].empty()) continue;
    std::size_t arg = 0;
    for (std::size_t j = 1; j < score[t].size(); ++j) {
      if (score[t][j] > score[t][arg]) arg = j;
    }
    while (true) {
      out[t] = arg;
      if (starts[t]) break;
      arg = back[t][arg];
      --t;
    }
  }
  return out;
}

MapMatcher::MapMatcher(const RoadGraph& graph, const MatchConfig& config)
    : graph_(graph), config_(config), index_(graph_) {
  config_.validate();
}

std::map<NodeId, MapMatcher::RouteState> MapMatcher::routes_from(
    const EdgeCandidate& from, double limit) const {
  // Dijkstra over nodes on cost = distance / beta - sum of log P, tracking
  // the distance and log-probability of the chosen path.
  const double beta = config_.route_beta;
  const Edge& e1 = graph_.edge(from.edge);
  const double len1 = graph_.edge_length(from.edge);
  const double s1 = from.projection.arc_offset;
  std::map<NodeId, RouteState> settled;
  std::map<NodeId, RouteState> frontier;
  using Item = std::pair<double, std::int64_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  auto push = [&](NodeId v, double dist, double logp) {
    if (dist > limit || settled.contains(v)) return;
    const double cost = dist / beta - logp;
    auto it = frontier.find(v);
    if (it != frontier.end() && it->second.cost <= cost) return;
    frontier[v] = {cost, dist, logp};
    queue.emplace(cost, to_int(v));
  };
  push(e1.a, offset_to_node(e1, len1, s1, e1.a), 0.0);
  push(e1.b, offset_to_node(e1, len1, s1, e1.b), 0.0);
  while (!queue.empty()) {
    const auto [cost, raw] = queue.top();
    queue.pop();
    const NodeId v{raw};
    if (settled.contains(v)) continue;
    const RouteState st = frontier.at(v);
    if (st.cost < cost) continue;
    settled[v] = st;
    for (EdgeId f : graph_.incident_edges(v)) {
      const Edge& fe = graph_.edge(f);
      if (fe.is_self_loop()) continue;
      const double lp = std::log(edge_transition_prob(v, f, graph_, config_));
      push(fe.other(v), st.dist + graph_.edge_length(f), st.logp + lp);
    }
  }
  return settled;
}

std::optional<double> MapMatcher::finish_route(
    const EdgeCandidate& from, const std::map<NodeId, RouteState>& routes,
    const EdgeCandidate& to, double straight, double limit,
    double* route) const {
  const double beta = config_.route_beta;
  const Edge& e2 = graph_.edge(to.edge);
  const double len2 = graph_.edge_length(to.edge);
  const double s2 = to.projection.arc_offset;
  double best_cost = kInf, best_dist = kInf, best_logp = 0.0;
  auto offer = [&](double cost, double dist, double logp) {
    if (dist > limit) return;
    if (cost < best_cost) best_cost = cost, best_dist = dist, best_logp = logp;
  };
  if (from.edge == to.edge) {
    const double d = std::abs(s2 - from.projection.arc_offset);
    offer(d / beta, d, 0.0);
  }
  for (NodeId w : {e2.a, e2.b}) {
    const auto it = routes.find(w);
    if (it == routes.end()) continue;
    const double rest = offset_to_node(e2, len2, s2, w);
    const double lp = std::log(edge_transition_prob(w, to.edge, graph_, config_));
    const double dist = it->second.dist + rest;
    offer(dist / beta - (it->second.logp + lp), dist, it->second.logp + lp);
  }
  if (best_cost == kInf) return std::nullopt;
  if (route) *route = best_dist;
  return -std::abs(best_dist - straight) / beta + best_logp;
}

double MapMatcher::route_limit(double straight) const {
  return config_.max_route_factor * straight + 2.0 * config_.candidate_radius;
}

std::optional<double> MapMatcher::transition_score(const EdgeCandidate& from,
                                                   const EdgeCandidate& to,
                                                   double straight,
                                                   double* route) const {
  const double limit = route_limit(straight);
  return finish_route(from, routes_from(from, limit), to, straight, limit, route);
}

MatchLattice MapMatcher::build_lattice(const GnssTrace& trace) const {
  MatchLattice lat;
  const std::size_t n = trace.points.size();
  lat.candidates.resize(n);
  lat.emission.resize(n);
  lat.transition.resize(n);
  const double two_var = 2.0 * config_.emission_sigma * config_.emission_sigma;
  for (std::size_t t = 0; t < n; ++t) {
    auto cands = index_.query_radius(trace.points[t], config_.candidate_radius);
    if (cands.size() > config_.max_candidates) cands.resize(config_.max_candidates);
    for (const auto& c : cands) {
      const double d = c.projection.distance;
      lat.emission[t].push_back(-d * d / two_var);
    }
    lat.candidates[t] = std::move(cands);
    if (t == 0) continue;
    const auto& prev = lat.candidates[t - 1];
    const auto& cur = lat.candidates[t];
    const double straight = distance_xy(trace.points[t - 1], trace.points[t]);
    lat.transition[t].assign(prev.size(), std::vector<double>(cur.size(), -kInf));
    const double limit = route_limit(straight);
    for (std::size_t i = 0; i < prev.size(); ++i) {
      const auto routes = routes_from(prev[i], limit);
      for (std::size_t j = 0; j < cur.size(); ++j) {
        const auto s = finish_route(prev[i], routes, cur[j], straight, limit, nullptr);
        if (s) lat.transition[t][i][j] = *s;
      }
    }
  }
  return lat;
}

MatchResult MapMatcher::match(const GnssTrace& trace) const {
  if (trace.points.size() < 2) {
    throw InvalidInputError("trace " + std::to_string(trace.trace_id) +
                            " has fewer than 2 points");
  }
  const MatchLattice lat = build_lattice(trace);
  const auto path = viterbi_decode(lat);
  MatchResult r;
  r.trace_id = trace.trace_id;
  r.assignments.resize(path.size());
  r.arc_offsets.assign(path.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t t = 0; t < path.size(); ++t) {
    if (!path[t]) continue;
    const EdgeCandidate& c = lat.candidates[t][*path[t]];
    r.assignments[t] = c.edge;
    r.arc_offsets[t] = c.projection.arc_offset;
  }
  return r;
}

std::vector<MatchResult> MapMatcher::match_all(const std::vector<GnssTrace>& traces,
                                               int workers) const {
  std::vector<MatchResult> out(traces.size());
  parallel_for(traces.size(), workers,
               [&](std::size_t i) { out[i] = match(traces[i]); });
  return out;
}

MatchResult match_trace(const GnssTrace& trace, const MapMatcher& matcher) {
  return matcher.match(trace);
}

std::map<EdgeId, int> edge_support(const std::vector<MatchResult>& matches) {
  std::map<EdgeId, std::vector<TraceId>> seen;
  for (const MatchResult& m : matches) {
    for (const auto& a : m.assignments) {
      if (a) seen[*a].push_back(m.trace_id);
    }
  }
  std::map<EdgeId, int> out;
  for (auto& [e, ids] : seen) {
    std::sort(ids.begin(), ids.end());
    out[e] = static_cast<int>(std::unique(ids.begin(), ids.end()) - ids.begin());
  }
  return out;
}

void TransitionCounts::add(NodeId v, EdgeId a, EdgeId b, int n) {
  counts_[{v, std::min(a, b), std::max(a, b)}] += n;
}

int TransitionCounts::count(NodeId v, EdgeId a, EdgeId b) const {
  const auto it = counts_.find({v, std::min(a, b), std::max(a, b)});
  return it == counts_.end() ? 0 : it->second;
}

int TransitionCounts::count(EdgeId a, EdgeId b) const {
  int total = 0;
  for (const auto& [key, n] : counts_) {
    if (std::get<1>(key) == std::min(a, b) && std::get<2>(key) == std::max(a, b)) {
      total += n;
    }
  }
  return total;
}

TransitionCounts transition_counts(const std::vector<MatchResult>& matches,
                                   const RoadGraph& graph) {
  TransitionCounts out;
  for (const MatchResult& m : matches) {
    const bool have_offsets = m.arc_offsets.size() == m.assignments.size();
    std::size_t t = 0;
    const std::size_t n = m.assignments.size();
    while (t + 1 < n) {
      if (!m.assignments[t] || !m.assignments[t + 1] ||
          *m.assignments[t] == *m.assignments[t + 1]) {
        ++t;
        continue;
      }
      const EdgeId e1 = *m.assignments[t];
      const EdgeId e2 = *m.assignments[t + 1];
      const Edge& a = graph.edge(e1);
      const Edge& b = graph.edge(e2);
      std::vector<NodeId> shared;
      for (NodeId v : {a.a, a.b}) {
        if ((v == b.a || v == b.b) &&
            std::find(shared.begin(), shared.end(), v) == shared.end()) {
          shared.push_back(v);
        }
      }
      if (shared.empty()) {
        ++out.skipped;
        ++t;
        continue;
      }
      std::sort(shared.begin(), shared.end());
      NodeId via = shared.front();
      if (shared.size() > 1 && have_offsets && !std::isnan(m.arc_offsets[t]) &&
          !std::isnan(m.arc_offsets[t + 1])) {
        const double la = graph.edge_length(e1);
        const double lb = graph.edge_length(e2);
        double best = kInf;
        for (NodeId v : shared) {
          const double d = offset_to_node(a, la, m.arc_offsets[t], v) +
                           offset_to_node(b, lb, m.arc_offsets[t + 1], v);
          if (d < best) best = d, via = v;
        }
      }
      out.add(via, e1, e2);
      ++t;
    }
  }
  return out;
}

}  // namespace roadinfer
