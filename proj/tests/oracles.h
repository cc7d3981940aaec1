// Slow reference computations the tests compare the library against.

#ifndef ROADINFER_TESTS_ORACLES_H_
#define ROADINFER_TESTS_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "roadinfer/binary_grid.h"
#include "roadinfer/core.h"
#include "roadinfer/mapmatch.h"
#include "roadinfer/raster.h"
#include "roadinfer/segment.h"
#include "roadinfer/thinning.h"

namespace oracle {

using namespace roadinfer;

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Exhaustive MAP search over a lattice whose points all have candidates.
// Returns the best joint log score and every assignment reaching it within
// `tol`.
struct MapSearch {
  double best = kNegInf;
  std::vector<std::vector<std::size_t>> argmax;
};

inline MapSearch brute_force_map(const MatchLattice& lat, double tol = 1e-9) {
  const std::size_t n = lat.candidates.size();
  MapSearch out;
  std::vector<std::size_t> cur(n);
  bool collect = false;
  std::function<void(std::size_t, double)> rec = [&](std::size_t t, double score) {
    if (t == n) {
      if (!collect) {
        out.best = std::max(out.best, score);
      } else if (score >= out.best - tol) {
        out.argmax.push_back(cur);
      }
      return;
    }
    for (std::size_t j = 0; j < lat.candidates[t].size(); ++j) {
      double s = score + lat.emission[t][j];
      if (t > 0) s += lat.transition[t][cur[t - 1]][j];
      cur[t] = j;
      rec(t + 1, s);
    }
  };
  rec(0, 0.0);
  if (out.best == kNegInf) return out;
  collect = true;
  rec(0, 0.0);
  return out;
}

inline double path_score(const MatchLattice& lat, const std::vector<std::size_t>& a) {
  double s = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    s += lat.emission[t][a[t]];
    if (t > 0) s += lat.transition[t][a[t - 1]][a[t]];
  }
  return s;
}

using PixelSet = std::set<std::pair<int, int>>;

inline PixelSet pixels_of(const BinaryGrid& g) {
  PixelSet s;
  for (int y = 0; y < g.height(); ++y) {
    for (int x = 0; x < g.width(); ++x) {
      if (g.get(x, y)) s.insert({x, y});
    }
  }
  return s;
}

inline PixelSet dilate(const PixelSet& s, int width, int height) {
  PixelSet out;
  for (auto [x, y] : s) {
    for (int dy = 0; dy <= 1; ++dy) {
      for (int dx = 0; dx <= 1; ++dx) {
        if (x + dx < width && y + dy < height) out.insert({x + dx, y + dy});
      }
    }
  }
  return out;
}

// Straightforward CP-loss. Skeletons come from the library's Guo-Hall
// thinning, everything after that is recomputed here.
inline CpLoss naive_cp_loss(const RasterTile& pred, const RasterTile& label,
                            const CpLossConfig& cfg) {
  const int w = pred.spec.width_px, h = pred.spec.height_px;
  BinaryGrid bp(w, h), bl(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      bp.set(x, y, pred.at(x, y) >= cfg.binarize_threshold);
      bl.set(x, y, label.at(x, y) >= cfg.binarize_threshold);
    }
  }
  const PixelSet sp = pixels_of(skeletonize_guo_hall(bp));
  const PixelSet sl = pixels_of(skeletonize_guo_hall(bl));
  const PixelSet dp = dilate(sp, w, h), dl = dilate(sl, w, h);
  PixelSet m;
  for (const auto& p : sp) {
    if (!dl.count(p)) m.insert(p);
  }
  for (const auto& p : sl) {
    if (!dp.count(p)) m.insert(p);
  }

  auto px_bce = [&](int x, int y) {
    const double p = std::min(std::max(pred.at(x, y), cfg.epsilon), 1.0 - cfg.epsilon);
    const double t = label.at(x, y);
    return -(t * std::log(p) + (1.0 - t) * std::log(1.0 - p));
  };
  double bce = 0.0, inter = 0.0, ps = 0.0, ys = 0.0, masked = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      bce += px_bce(x, y);
      inter += pred.at(x, y) * label.at(x, y);
      ps += pred.at(x, y);
      ys += label.at(x, y);
    }
  }
  for (auto [x, y] : m) masked += px_bce(x, y);
  const double n = static_cast<double>(w) * h;
  CpLoss out;
  out.bce = bce / n;
  out.dice = 1.0 - (2.0 * inter + cfg.epsilon) / (ps + ys + cfg.epsilon);
  out.connectivity_penalty = cfg.sigma * masked / n;
  out.total = out.bce + out.dice + out.connectivity_penalty;
  return out;
}

// Union of random filled discs and rectangles.
inline BinaryGrid random_blobs(std::mt19937_64& rng, int w, int h, int shapes) {
  BinaryGrid g(w, h);
  std::uniform_int_distribution<int> px(0, w - 1), py(0, h - 1), size(1, 8);
  for (int s = 0; s < shapes; ++s) {
    const int cx = px(rng), cy = py(rng), r = size(rng);
    const bool disc = rng() & 1;
    const int rw = size(rng), rh = size(rng);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const bool in = disc ? (x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r
                             : std::abs(x - cx) <= rw && std::abs(y - cy) <= rh;
        if (in) g.set(x, y);
      }
    }
  }
  return g;
}

// Connected components of the node set, as node -> component label.
inline std::map<NodeId, int> components(const RoadGraph& g) {
  std::map<NodeId, int> label;
  int next = 0;
  for (const auto& [id, p] : g.nodes()) {
    if (label.count(id)) continue;
    std::queue<NodeId> q;
    q.push(id);
    label[id] = next;
    while (!q.empty()) {
      const NodeId v = q.front();
      q.pop();
      for (EdgeId e : g.incident_edges(v)) {
        const NodeId u = g.edge(e).other(v);
        if (!label.count(u)) label[u] = next, q.push(u);
      }
    }
    ++next;
  }
  return label;
}

// Node of `g` closest to `p` in XY.
inline NodeId nearest_node(const RoadGraph& g, const LocalPoint& p) {
  NodeId best{};
  double bd = std::numeric_limits<double>::infinity();
  for (const auto& [id, q] : g.nodes()) {
    const double d = distance_xy(p, q);
    if (d < bd) bd = d, best = id;
  }
  return best;
}

// Adds nodes at a and b (in that order) and a straight edge between them.
inline EdgeId add_road(RoadGraph& g, const LocalPoint& a, const LocalPoint& b,
                       Provenance prov = Provenance::kSegmentation) {
  const NodeId na = g.add_node(a);
  const NodeId nb = g.add_node(b);
  return g.add_edge(na, nb, {}, prov);
}

// Per-edge distinct trace counts straight from the generator's oracle.
inline std::map<EdgeId, int> oracle_support(const std::map<TraceId, std::vector<EdgeId>>& o) {
  std::map<EdgeId, int> out;
  for (const auto& [tid, edges] : o) {
    for (EdgeId e : std::set<EdgeId>(edges.begin(), edges.end())) ++out[e];
  }
  return out;
}

}  // namespace oracle

#endif  // ROADINFER_TESTS_ORACLES_H_
