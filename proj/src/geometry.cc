#include "roadinfer/geometry.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "roadinfer/error.h"

namespace roadinfer {

double norm(const Vec2& v) { return std::hypot(v.x, v.y); }

double angle_between_deg(const Vec2& a, const Vec2& b) {
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  const double c = std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
  return std::acos(c) * 180.0 / std::numbers::pi;
}

namespace {

// Closest point on segment a-b; returns the parameter t in [0, 1].
double segment_param(const LocalPoint& a, const LocalPoint& b,
                     const LocalPoint& q) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return 0.0;
  return std::clamp(dot(q - a, ab) / len2, 0.0, 1.0);
}

LocalPoint lerp(const LocalPoint& a, const LocalPoint& b, double t) {
  return {a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t, a.z + (b.z - a.z) * t};
}

}  // namespace

PolylineProjection project_onto_polyline(const std::vector<LocalPoint>& polyline,
                                         const LocalPoint& q) {
  if (polyline.empty()) throw InvalidInputError("empty polyline");
  PolylineProjection best;
  best.point = polyline.front();
  best.distance = distance_xy(q, polyline.front());
  double arc = 0.0;
  for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
    const LocalPoint& a = polyline[i];
    const LocalPoint& b = polyline[i + 1];
    const double seg_len = distance_xy(a, b);
    const double t = segment_param(a, b, q);
    const LocalPoint p = lerp(a, b, t);
    const double d = distance_xy(q, p);
    if (d < best.distance) {
      best = {p, d, arc + t * seg_len, i};
    }
    arc += seg_len;
  }
  return best;
}

LocalPoint point_at_arc(const std::vector<LocalPoint>& polyline, double s) {
  if (polyline.empty()) throw InvalidInputError("empty polyline");
  if (s <= 0.0) return polyline.front();
  double arc = 0.0;
  for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
    const double seg_len = distance_xy(polyline[i], polyline[i + 1]);
    if (arc + seg_len >= s && seg_len > 0.0) {
      return lerp(polyline[i], polyline[i + 1], (s - arc) / seg_len);
    }
    arc += seg_len;
  }
  return polyline.back();
}

std::vector<LocalPoint> sub_polyline(const std::vector<LocalPoint>& polyline,
                                     double s0, double s1) {
  std::vector<LocalPoint> out;
  out.push_back(point_at_arc(polyline, s0));
  double arc = 0.0;
  for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
    arc += distance_xy(polyline[i], polyline[i + 1]);
    if (arc > s0 && arc < s1) out.push_back(polyline[i + 1]);
  }
  out.push_back(point_at_arc(polyline, s1));
  return out;
}

Vec2 tangent_at_arc(const std::vector<LocalPoint>& polyline, double s) {
  double arc = 0.0;
  for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
    const Vec2 d = polyline[i + 1] - polyline[i];
    const double seg_len = norm(d);
    if (seg_len > 0.0 && (arc + seg_len >= s || i + 2 == polyline.size())) {
      return {d.x / seg_len, d.y / seg_len};
    }
    arc += seg_len;
  }
  return {1.0, 0.0};
}

void dedupe_vertices(std::vector<LocalPoint>& polyline, double eps) {
  if (polyline.size() < 2) return;
  std::vector<LocalPoint> out;
  out.reserve(polyline.size());
  out.push_back(polyline.front());
  for (std::size_t i = 1; i + 1 < polyline.size(); ++i) {
    if (distance_xy(out.back(), polyline[i]) > eps) out.push_back(polyline[i]);
  }
  // Keep the final vertex exactly; drop an interior one that duplicates it.
  if (out.size() > 1 && distance_xy(out.back(), polyline.back()) <= eps) {
    out.pop_back();
  }
  out.push_back(polyline.back());
  polyline = std::move(out);
}

std::optional<double> segment_intersection(const LocalPoint& p, const Vec2& r,
                                           const LocalPoint& q, const Vec2& s) {
  const double denom = cross(r, s);
  if (std::abs(denom) < 1e-12) return std::nullopt;
  const Vec2 qp = q - p;
  const double t = cross(qp, s) / denom;
  const double u = cross(qp, r) / denom;
  if (t < 0.0 || t > 1.0 || u < 0.0 || u > 1.0) return std::nullopt;
  return t;
}

EdgeIndex::EdgeIndex(const RoadGraph& graph, double cell_size)
    : graph_(&graph), cell_size_(cell_size) {
  if (graph.edge_count() == 0) {
    throw InvalidInputError("cannot index a graph without edges");
  }
  if (!(cell_size > 0.0)) throw InvalidInputError("cell size must be positive");
  bool first = true;
  for (const auto& [id, e] : graph.edges()) {
    for (std::size_t i = 0; i + 1 < e.polyline.size(); ++i) {
      const LocalPoint& a = e.polyline[i];
      const LocalPoint& b = e.polyline[i + 1];
      const std::int64_t x0 = cell_of(std::min(a.x, b.x));
      const std::int64_t x1 = cell_of(std::max(a.x, b.x));
      const std::int64_t y0 = cell_of(std::min(a.y, b.y));
      const std::int64_t y1 = cell_of(std::max(a.y, b.y));
      if (first) {
        min_cx_ = x0, max_cx_ = x1, min_cy_ = y0, max_cy_ = y1;
        first = false;
      }
      min_cx_ = std::min(min_cx_, x0);
      max_cx_ = std::max(max_cx_, x1);
      min_cy_ = std::min(min_cy_, y0);
      max_cy_ = std::max(max_cy_, y1);
      for (std::int64_t cx = x0; cx <= x1; ++cx) {
        for (std::int64_t cy = y0; cy <= y1; ++cy) {
          cells_[key(cx, cy)].push_back({id, i});
        }
      }
    }
  }
}

std::int64_t EdgeIndex::key(std::int64_t cx, std::int64_t cy) const {
  return (cx << 32) ^ (cy & 0xffffffff);
}

std::int64_t EdgeIndex::cell_of(double v) const {
  return static_cast<std::int64_t>(std::floor(v / cell_size_));
}

std::vector<EdgeCandidate> EdgeIndex::query_radius(const LocalPoint& q,
                                                   double radius) const {
  std::vector<EdgeCandidate> out;
  const std::int64_t x0 = std::max(cell_of(q.x - radius), min_cx_);
  const std::int64_t x1 = std::min(cell_of(q.x + radius), max_cx_);
  const std::int64_t y0 = std::max(cell_of(q.y - radius), min_cy_);
  const std::int64_t y1 = std::min(cell_of(q.y + radius), max_cy_);
  std::vector<EdgeId> seen;
  for (std::int64_t cx = x0; cx <= x1; ++cx) {
    for (std::int64_t cy = y0; cy <= y1; ++cy) {
      const auto it = cells_.find(key(cx, cy));
      if (it == cells_.end()) continue;
      for (const SegmentRef& ref : it->second) seen.push_back(ref.edge);
    }
  }
  std::sort(seen.begin(), seen.end());
  seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
  for (EdgeId id : seen) {
    const PolylineProjection proj =
        project_onto_polyline(graph_->edge(id).polyline, q);
    if (proj.distance <= radius) out.push_back({id, proj});
  }
  std::sort(out.begin(), out.end(),
            [](const EdgeCandidate& a, const EdgeCandidate& b) {
              if (a.projection.distance != b.projection.distance) {
                return a.projection.distance < b.projection.distance;
              }
              return a.edge < b.edge;
            });
  return out;
}

std::vector<EdgeCandidate> EdgeIndex::query_nearest(const LocalPoint& q,
                                                    std::size_t k) const {
  if (k == 0) return {};
  const double span =
      cell_size_ * static_cast<double>(std::max(max_cx_ - min_cx_,
                                                max_cy_ - min_cy_) + 2);
  double r = cell_size_;
  while (true) {
    auto found = query_radius(q, r);
    const double to_box =
        std::hypot(std::max({0.0, min_cx_ * cell_size_ - q.x,
                             q.x - (max_cx_ + 1) * cell_size_}),
                   std::max({0.0, min_cy_ * cell_size_ - q.y,
                             q.y - (max_cy_ + 1) * cell_size_}));
    if (found.size() >= k || r > to_box + 2.0 * span) {
      if (found.size() > k) found.resize(k);
      return found;
    }
    r *= 2.0;
  }
}

}  // namespace roadinfer
