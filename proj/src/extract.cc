#include "roadinfer/extract.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <utility>
#include <vector>

#include "roadinfer/error.h"
#include "roadinfer/geometry.h"

namespace roadinfer {
namespace {

constexpr int kDx[8] = {1, 1, 0, -1, -1, -1, 0, 1};
constexpr int kDy[8] = {0, 1, 1, 1, 0, -1, -1, -1};

// Loops back to their own junction through fewer pixels than this are
// thinning residue, not roads.
constexpr std::size_t kMinLoopPixels = 4;

struct Px {
  int x;
  int y;
  friend bool operator==(const Px&, const Px&) = default;
};

// Drops interior vertices lying on a straight continuation of their
// neighbors.
std::vector<LocalPoint> merge_collinear(const std::vector<LocalPoint>& pl) {
  if (pl.size() <= 2) return pl;
  std::vector<LocalPoint> out{pl.front()};
  for (std::size_t i = 1; i + 1 < pl.size(); ++i) {
    const Vec2 a = pl[i] - out.back();
    const Vec2 b = pl[i + 1] - pl[i];
    if (std::abs(cross(a, b)) > 1e-9 || dot(a, b) <= 0.0) out.push_back(pl[i]);
  }
  out.push_back(pl.back());
  return out;
}

Provenance merged_provenance(Provenance a, Provenance b) {
  if (a == Provenance::kGapFill || b == Provenance::kGapFill) {
    return Provenance::kGapFill;
  }
  if (a == b) return a;
  return Provenance::kSegmentation;
}

// Removes edges that collapsed to (near) zero length and tidies polylines.
void tidy_edges(RoadGraph& g, double min_self_loop_len) {
  std::vector<EdgeId> ids;
  for (const auto& [id, e] : g.edges()) ids.push_back(id);
  for (EdgeId id : ids) {
    std::vector<LocalPoint> pl = g.edge(id).polyline;
    dedupe_vertices(pl);
    const double len = polyline_length(pl);
    const bool loop = g.edge(id).is_self_loop();
    if (len <= 1e-9 || pl.size() < 2 || (loop && len < min_self_loop_len)) {
      g.remove_edge(id);
    } else {
      g.set_polyline(id, std::move(pl));
    }
  }
}

}  // namespace

void CleaningConfig::validate() const {
  if (!(min_dead_end_len >= 0.0) || !(collapse_edge_len >= 0.0)) {
    throw InvalidInputError("cleaning thresholds must be >= 0");
  }
}

BinaryGrid to_binary_grid(const RasterTile& tile, double threshold) {
  BinaryGrid g(tile.spec.width_px, tile.spec.height_px);
  for (int y = 0; y < tile.spec.height_px; ++y) {
    for (int x = 0; x < tile.spec.width_px; ++x) {
      if (tile.at(x, y) >= threshold) g.set(x, y);
    }
  }
  return g;
}

RoadGraph vectorize(const SkeletonMask& skeleton) {
  const BinaryGrid& g = skeleton.grid;
  if (g.width() != skeleton.spec.width_px ||
      g.height() != skeleton.spec.height_px) {
    throw InvalidInputError("skeleton grid does not match its tile spec");
  }
  if (has_2x2_block(g)) {
    throw InvalidInputError("skeleton is not thin (contains a 2x2 block)");
  }
  const int w = g.width();
  const int h = g.height();
  auto idx = [w](int x, int y) { return static_cast<std::size_t>(y) * w + x; };

  // Node pixels and their 8-connected clusters.
  std::vector<int> cluster(static_cast<std::size_t>(w) * h, -1);
  std::vector<std::vector<Px>> clusters;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!g.get(x, y) || cluster[idx(x, y)] >= 0) continue;
      const int n = neighbor_count_8(g, x, y);
      if (n == 2 || n == 0) continue;
      const int id = static_cast<int>(clusters.size());
      clusters.emplace_back();
      std::vector<Px> stack{{x, y}};
      cluster[idx(x, y)] = id;
      while (!stack.empty()) {
        const Px p = stack.back();
        stack.pop_back();
        clusters[id].push_back(p);
        for (int k = 0; k < 8; ++k) {
          const int nx = p.x + kDx[k], ny = p.y + kDy[k];
          if (!g.get(nx, ny) || cluster[idx(nx, ny)] >= 0) continue;
          const int nn = neighbor_count_8(g, nx, ny);
          if (nn == 2 || nn == 0) continue;
          cluster[idx(nx, ny)] = id;
          stack.push_back({nx, ny});
        }
      }
    }
  }

  RoadGraph graph;
  std::vector<Px> representative;
  for (auto& members : clusters) {
    std::sort(members.begin(), members.end(), [](const Px& a, const Px& b) {
      return a.y != b.y ? a.y < b.y : a.x < b.x;
    });
    double cx = 0.0, cy = 0.0;
    for (const Px& p : members) cx += p.x, cy += p.y;
    cx /= static_cast<double>(members.size());
    cy /= static_cast<double>(members.size());
    Px best = members.front();
    double best_d = std::numeric_limits<double>::infinity();
    for (const Px& p : members) {
      const double d = std::hypot(p.x - cx, p.y - cy);
      if (d < best_d - 1e-12) best = p, best_d = d;
    }
    representative.push_back(best);
    graph.add_node(skeleton.spec.pixel_center(best.x, best.y));
  }

  auto center = [&](const Px& p) { return skeleton.spec.pixel_center(p.x, p.y); };
  std::vector<std::uint8_t> visited(static_cast<std::size_t>(w) * h, 0);

  // Follows degree-2 pixels from `first` (a neighbor of `from`) until a node
  // pixel or `stop` is reached. Returns the path and the pixel it ended on.
  auto trace = [&](Px from, Px first, const Px* stop) {
    std::vector<Px> path{first};
    visited[idx(first.x, first.y)] = 1;
    Px prev = from, cur = first;
    while (true) {
      std::optional<Px> next;
      for (int k = 0; k < 8; ++k) {
        const Px n{cur.x + kDx[k], cur.y + kDy[k]};
        if (!g.get(n.x, n.y) || n == prev) continue;
        if (cluster[idx(n.x, n.y)] >= 0 || (stop && n == *stop)) {
          return std::make_pair(path, n);
        }
        if (!next && !visited[idx(n.x, n.y)]) next = n;
      }
      if (!next) return std::make_pair(path, cur);
      prev = cur;
      cur = *next;
      visited[idx(cur.x, cur.y)] = 1;
      path.push_back(cur);
    }
  };

  auto add_path_edge = [&](NodeId a, NodeId b, const Px& ra, const Px& rb,
                           const std::vector<Px>& path) {
    std::vector<LocalPoint> pl{center(ra)};
    for (const Px& p : path) pl.push_back(center(p));
    pl.push_back(center(rb));
    dedupe_vertices(pl);
    pl = merge_collinear(pl);
    if (polyline_length(pl) > 0.0) {
      graph.add_edge(a, b, std::move(pl), Provenance::kSegmentation);
    }
  };

  for (std::size_t c = 0; c < clusters.size(); ++c) {
    for (const Px& p : clusters[c]) {
      for (int k = 0; k < 8; ++k) {
        const Px n{p.x + kDx[k], p.y + kDy[k]};
        if (!g.get(n.x, n.y) || cluster[idx(n.x, n.y)] >= 0 ||
            visited[idx(n.x, n.y)]) {
          continue;
        }
        const auto [path, end] = trace(p, n, nullptr);
        const int end_cluster = cluster[idx(end.x, end.y)];
        if (end_cluster < 0) continue;  // dangling; cannot happen when thin
        if (end_cluster == static_cast<int>(c) && path.size() < kMinLoopPixels) {
          continue;
        }
        add_path_edge(NodeId{static_cast<std::int64_t>(c)},
                      NodeId{end_cluster}, representative[c],
                      representative[end_cluster], path);
      }
    }
  }

  // Remaining unvisited pixels form pure cycles.
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!g.get(x, y) || visited[idx(x, y)] || cluster[idx(x, y)] >= 0 ||
          neighbor_count_8(g, x, y) != 2) {
        continue;
      }
      const Px anchor{x, y};
      visited[idx(x, y)] = 1;
      const NodeId node = graph.add_node(center(anchor));
      for (int k = 0; k < 8; ++k) {
        const Px n{x + kDx[k], y + kDy[k]};
        if (!g.get(n.x, n.y) || visited[idx(n.x, n.y)]) continue;
        auto [path, end] = trace(anchor, n, &anchor);
        if (path.size() + 1 >= kMinLoopPixels) {
          add_path_edge(node, node, anchor, anchor, path);
        }
        break;
      }
    }
  }

  graph.drop_isolated_nodes();
  graph.validate();
  return graph;
}

RoadGraph collapse_short_junction_edges(const RoadGraph& graph,
                                        const CleaningConfig& config) {
  config.validate();
  RoadGraph g = graph;
  while (true) {
    std::optional<EdgeId> target;
    double target_len = std::numeric_limits<double>::infinity();
    for (const auto& [id, e] : g.edges()) {
      if (e.is_self_loop()) continue;
      const double len = g.edge_length(id);
      if (len >= config.collapse_edge_len || len >= target_len) continue;
      if (g.degree(e.a) >= 3 && g.degree(e.b) >= 3) {
        target = id;
        target_len = len;
      }
    }
    if (!target) break;

    const Edge e = g.edge(*target);
    const LocalPoint mid = point_at_arc(e.polyline, target_len / 2.0);
    const NodeId keep = std::min(e.a, e.b);
    const NodeId drop = std::max(e.a, e.b);
    g.remove_edge(*target);
    g.move_node(keep, mid);
    const std::vector<EdgeId> moved = g.incident_edges(drop);
    for (EdgeId id : moved) {
      const Edge& m = g.edge(id);
      const bool both = m.is_self_loop();
      g.reattach_edge_end(id, drop, keep);
      if (both) g.reattach_edge_end(id, drop, keep);
    }
    g.remove_node(drop);
    tidy_edges(g, config.collapse_edge_len);
  }
  g.drop_isolated_nodes();
  g.validate();
  return g;
}

RoadGraph prune_dead_ends(const RoadGraph& graph, const CleaningConfig& config) {
  config.validate();
  RoadGraph g = graph;
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<EdgeId> ids;
    for (const auto& [id, e] : g.edges()) ids.push_back(id);
    for (EdgeId id : ids) {
      if (!g.has_edge(id)) continue;
      const Edge& e = g.edge(id);
      if (e.is_self_loop()) continue;
      const int da = g.degree(e.a);
      const int db = g.degree(e.b);
      std::optional<NodeId> tip;
      if (da == 1 && db >= 3) tip = e.a;
      if (db == 1 && da >= 3) tip = e.b;
      if (!tip || g.edge_length(id) >= config.min_dead_end_len) continue;
      g.remove_node(*tip);
      changed = true;
    }
  }
  g.drop_isolated_nodes();
  g.validate();
  return g;
}

RoadGraph simplify_degree2(const RoadGraph& graph) {
  RoadGraph g = graph;
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<NodeId> ids;
    for (const auto& [id, p] : g.nodes()) ids.push_back(id);
    for (NodeId v : ids) {
      if (!g.has_node(v)) continue;
      const std::vector<EdgeId> inc = g.incident_edges(v);
      if (inc.size() != 2 || g.degree(v) != 2) continue;
      const Edge e1 = g.edge(inc[0]);
      const Edge e2 = g.edge(inc[1]);
      std::vector<LocalPoint> first = e1.polyline;
      if (e1.a == v) std::reverse(first.begin(), first.end());
      std::vector<LocalPoint> second = e2.polyline;
      if (e2.b == v) std::reverse(second.begin(), second.end());
      first.insert(first.end(), second.begin() + 1, second.end());
      const NodeId x = e1.other(v);
      const NodeId y = e2.other(v);
      const Provenance prov = merged_provenance(e1.provenance, e2.provenance);
      g.remove_node(v);
      dedupe_vertices(first);
      g.add_edge(std::min(inc[0], inc[1]), x, y, std::move(first), prov);
      changed = true;
    }
  }
  g.validate();
  return g;
}

RoadGraph clean_graph(const RoadGraph& graph, const CleaningConfig& config) {
  RoadGraph g = collapse_short_junction_edges(graph, config);
  g = prune_dead_ends(g, config);
  return simplify_degree2(g);
}

}  // namespace roadinfer
