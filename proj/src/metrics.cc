#include "roadinfer/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <tuple>
#include <unordered_map>
#include <utility>

#include "roadinfer/binary_grid.h"
#include "roadinfer/error.h"
#include "roadinfer/extract.h"
#include "roadinfer/geometry.h"

namespace roadinfer {
namespace {

bool lex_less(const LocalPoint& a, const LocalPoint& b) {
  return std::tie(a.x, a.y) < std::tie(b.x, b.y);
}

// Arc intervals of each edge within a traversal radius of a start.
using Coverage = std::map<EdgeId, std::vector<std::pair<double, double>>>;

Coverage traverse(const RoadGraph& g, std::optional<NodeId> start_node,
                  std::optional<std::pair<EdgeId, double>> start_point,
                  double radius) {
  Coverage cov;
  std::map<NodeId, double> dist;
  using Item = std::pair<double, std::int64_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  auto reach = [&](NodeId v, double d) {
    if (d > radius) return;
    auto it = dist.find(v);
    if (it != dist.end() && it->second <= d) return;
    dist[v] = d;
    queue.emplace(d, to_int(v));
  };
  if (start_node) reach(*start_node, 0.0);
  if (start_point) {
    const auto [e, s] = *start_point;
    const Edge& edge = g.edge(e);
    const double len = g.edge_length(e);
    cov[e].emplace_back(std::max(0.0, s - radius), std::min(len, s + radius));
    reach(edge.a, s);
    reach(edge.b, len - s);
  }
  while (!queue.empty()) {
    const auto [d, raw] = queue.top();
    queue.pop();
    const NodeId v{raw};
    if (dist.at(v) < d) continue;
    const double left = radius - d;
    for (EdgeId f : g.incident_edges(v)) {
      const Edge& e = g.edge(f);
      const double len = g.edge_length(f);
      if (e.a == v) {
        cov[f].emplace_back(0.0, std::min(len, left));
        reach(e.b, d + len);
      }
      if (e.b == v) {
        cov[f].emplace_back(std::max(0.0, len - left), len);
        reach(e.a, d + len);
      }
    }
  }
  return cov;
}

std::vector<LocalPoint> coverage_vertices(const RoadGraph& g, Coverage cov,
                                          double interval) {
  std::vector<LocalPoint> out;
  std::set<NodeId> nodes;  // a node shared by several edges counts once
  for (auto& [id, spans] : cov) {
    std::sort(spans.begin(), spans.end());
    std::vector<std::pair<double, double>> merged;
    for (const auto& s : spans) {
      if (!merged.empty() && s.first <= merged.back().second) {
        merged.back().second = std::max(merged.back().second, s.second);
      } else {
        merged.push_back(s);
      }
    }
    const Edge& e = g.edge(id);
    const double len = g.edge_length(id);
    for (const auto& [s0, s1] : merged) {
      if (s1 - s0 <= 1e-9) continue;
      auto pts = interpolate_polyline(sub_polyline(e.polyline, s0, s1), interval);
      const bool head = s0 <= 1e-9 && !nodes.insert(e.a).second;
      const bool tail = s1 >= len - 1e-9 && !nodes.insert(e.b).second;
      if (tail && pts.size() > 1) pts.pop_back();
      out.insert(out.end(), pts.begin() + (head ? 1 : 0), pts.end());
    }
  }
  return out;
}

struct PairCounts {
  std::size_t matched_p = 0, total_p = 0, matched_g = 0, total_g = 0;
};

// Subgraph pairs anchored at every node of `from`, compared against the
// closest edge of `to`. Counts are returned from `from`'s point of view.
PairCounts anchored_pairs(const RoadGraph& from, const RoadGraph& to,
                          const ItopoConfig& config) {
  PairCounts out;
  std::optional<EdgeIndex> index;
  if (to.edge_count() > 0) index.emplace(to);
  for (const auto& [v, p] : from.nodes()) {
    const auto h = coverage_vertices(
        from, traverse(from, v, std::nullopt, config.traversal_radius),
        config.geo.interpolation_interval);
    std::vector<LocalPoint> h_hat;
    if (index) {
      const auto near = index->query_radius(p, config.node_match_radius);
      if (!near.empty()) {
        h_hat = coverage_vertices(
            to,
            traverse(to, std::nullopt,
                     std::make_pair(near.front().edge,
                                    near.front().projection.arc_offset),
                     config.traversal_radius),
            config.geo.interpolation_interval);
      }
    }
    const std::size_t m = match_vertices(h, h_hat, config.geo.match_radius);
    out.matched_p += m;
    out.matched_g += m;
    out.total_p += h.size();
    out.total_g += h_hat.size();
  }
  return out;
}

}  // namespace

void GeoConfig::validate() const {
  if (!(interpolation_interval > 0.0) || !(match_radius > 0.0)) {
    throw InvalidInputError("GEO interval and radius must be > 0");
  }
}

void ItopoConfig::validate() const {
  geo.validate();
  if (!(node_match_radius > 0.0) || !(traversal_radius > 0.0)) {
    throw InvalidInputError("iTOPO radii must be > 0");
  }
}

std::vector<LocalPoint> interpolate_polyline(const std::vector<LocalPoint>& polyline,
                                             double interval) {
  if (!(interval > 0.0)) throw InvalidInputError("interval must be > 0");
  const double len = polyline_length(polyline);
  std::vector<LocalPoint> out;
  for (int k = 0; k * interval < len - 1e-9; ++k) {
    out.push_back(point_at_arc(polyline, k * interval));
  }
  out.push_back(polyline.back());
  return out;
}

std::vector<GraphVertex> interpolate_vertices(const RoadGraph& graph,
                                              double interval) {
  std::vector<GraphVertex> out;
  std::set<NodeId> nodes;
  for (const auto& [id, e] : graph.edges()) {
    const auto pts = interpolate_polyline(e.polyline, interval);
    const std::size_t first = nodes.insert(e.a).second ? 0 : 1;
    const std::size_t last = nodes.insert(e.b).second ? pts.size() : pts.size() - 1;
    for (std::size_t i = first; i < last; ++i) out.push_back({pts[i], id});
  }
  return out;
}

std::size_t match_vertices(const std::vector<LocalPoint>& a,
                           const std::vector<LocalPoint>& b, double radius) {
  if (a.empty() || b.empty()) return 0;
  // Bucket b on a grid of cell size `radius`.
  auto cell = [radius](double v) {
    return static_cast<std::int64_t>(std::floor(v / radius));
  };
  auto key = [](std::int64_t x, std::int64_t y) { return (x << 32) ^ (y & 0xffffffff); };
  std::unordered_map<std::int64_t, std::vector<std::size_t>> grid;
  for (std::size_t j = 0; j < b.size(); ++j) {
    grid[key(cell(b[j].x), cell(b[j].y))].push_back(j);
  }
  struct Pair {
    double d;
    LocalPoint lo, hi;
    std::size_t i, j;
  };
  std::vector<Pair> pairs;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::int64_t cx = cell(a[i].x), cy = cell(a[i].y);
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        const auto it = grid.find(key(cx + dx, cy + dy));
        if (it == grid.end()) continue;
        for (std::size_t j : it->second) {
          const double d = distance_xy(a[i], b[j]);
          if (d > radius) continue;
          const bool a_first = !lex_less(b[j], a[i]);
          pairs.push_back({d, a_first ? a[i] : b[j], a_first ? b[j] : a[i], i, j});
        }
      }
    }
  }
  // Ties are broken on coordinates only, so swapping the two sets yields
  // the same matching.
  std::sort(pairs.begin(), pairs.end(), [](const Pair& p, const Pair& q) {
    if (p.d != q.d) return p.d < q.d;
    if (lex_less(p.lo, q.lo)) return true;
    if (lex_less(q.lo, p.lo)) return false;
    return lex_less(p.hi, q.hi);
  });
  std::vector<bool> used_a(a.size(), false), used_b(b.size(), false);
  std::size_t matched = 0;
  for (const Pair& p : pairs) {
    if (used_a[p.i] || used_b[p.j]) continue;
    used_a[p.i] = used_b[p.j] = true;
    ++matched;
  }
  return matched;
}

MetricReport finish_report(std::size_t matched_proposal, std::size_t total_proposal,
                           std::size_t matched_gt, std::size_t total_gt) {
  MetricReport r;
  r.matched_proposal = matched_proposal;
  r.total_proposal = total_proposal;
  r.matched_gt = matched_gt;
  r.total_gt = total_gt;
  if (total_proposal == 0 && total_gt == 0) {
    r.precision = r.recall = r.f1 = 1.0;
    return r;
  }
  if (total_proposal == 0 || total_gt == 0) return r;
  r.precision = static_cast<double>(matched_proposal) / static_cast<double>(total_proposal);
  r.recall = static_cast<double>(matched_gt) / static_cast<double>(total_gt);
  if (r.precision + r.recall > 0.0) {
    r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  }
  return r;
}

MetricReport geo_metric(const RoadGraph& proposal, const RoadGraph& gt,
                        const GeoConfig& config) {
  config.validate();
  std::vector<LocalPoint> p, g;
  for (const auto& v : interpolate_vertices(proposal, config.interpolation_interval)) {
    p.push_back(v.point);
  }
  for (const auto& v : interpolate_vertices(gt, config.interpolation_interval)) {
    g.push_back(v.point);
  }
  const std::size_t m = match_vertices(p, g, config.match_radius);
  return finish_report(m, p.size(), m, g.size());
}

MetricReport itopo_metric(const RoadGraph& proposal, const RoadGraph& gt,
                          const ItopoConfig& config) {
  config.validate();
  const PairCounts fwd = anchored_pairs(proposal, gt, config);
  const PairCounts bwd = anchored_pairs(gt, proposal, config);
  return finish_report(fwd.matched_p + bwd.matched_g, fwd.total_p + bwd.total_g,
                       fwd.matched_g + bwd.matched_p, fwd.total_g + bwd.total_p);
}

MetricReport soft_f1(const RasterTile& pred, const RasterTile& gt) {
  if (!(pred.spec == gt.spec) || pred.values.size() != gt.values.size()) {
    throw InvalidInputError("masks are not co-registered");
  }
  const BinaryGrid dp = dilate_2x2(to_binary_grid(pred, 0.5));
  const BinaryGrid dg = dilate_2x2(to_binary_grid(gt, 0.5));
  std::size_t inter = 0;
  for (std::size_t i = 0; i < dp.cells().size(); ++i) {
    if (dp.cells()[i] && dg.cells()[i]) ++inter;
  }
  return finish_report(inter, dp.count(), inter, dg.count());
}

}  // namespace roadinfer
