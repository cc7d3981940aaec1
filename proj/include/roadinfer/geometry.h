#ifndef ROADINFER_GEOMETRY_H_
#define ROADINFER_GEOMETRY_H_

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "roadinfer/core.h"

namespace roadinfer {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator-(const LocalPoint& a, const LocalPoint& b) {
  return {a.x - b.x, a.y - b.y};
}
inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
double norm(const Vec2& v);
// Angle between two vectors in degrees, in [0, 180]. Zero vectors give 0.
double angle_between_deg(const Vec2& a, const Vec2& b);

// Closest point on a polyline to a query point.
struct PolylineProjection {
  LocalPoint point;
  double distance = 0.0;    // XY distance from the query
  double arc_offset = 0.0;  // arc length from polyline start to `point`
  std::size_t segment = 0;  // index of the segment containing `point`
};

PolylineProjection project_onto_polyline(const std::vector<LocalPoint>& polyline,
                                         const LocalPoint& q);

// Point at arc length `s` (clamped to [0, length]); z is interpolated.
LocalPoint point_at_arc(const std::vector<LocalPoint>& polyline, double s);

// Sub-polyline between arc lengths s0 <= s1.
std::vector<LocalPoint> sub_polyline(const std::vector<LocalPoint>& polyline,
                                     double s0, double s1);

// Unit tangent of the polyline at arc length s.
Vec2 tangent_at_arc(const std::vector<LocalPoint>& polyline, double s);

// Drops consecutive duplicate vertices (XY distance below eps).
void dedupe_vertices(std::vector<LocalPoint>& polyline, double eps = 1e-9);

// Parameter t along segment p->p+r where it crosses q->q+s, or nullopt when
// the segments do not intersect (parallel segments never intersect here).
std::optional<double> segment_intersection(const LocalPoint& p, const Vec2& r,
                                           const LocalPoint& q, const Vec2& s);

// Nearest point of one edge to a query.
struct EdgeCandidate {
  EdgeId edge{};
  PolylineProjection projection;
};

// Uniform-grid spatial index over edge polylines. Read-only after build.
class EdgeIndex {
 public:
  explicit EdgeIndex(const RoadGraph& graph, double cell_size = 32.0);

  // Nearest point of every edge within `radius`, sorted by distance then id.
  std::vector<EdgeCandidate> query_radius(const LocalPoint& q,
                                          double radius) const;
  // The k nearest edges, sorted by distance then id.
  std::vector<EdgeCandidate> query_nearest(const LocalPoint& q,
                                           std::size_t k) const;

  const RoadGraph& graph() const { return *graph_; }

 private:
  struct SegmentRef {
    EdgeId edge;
    std::size_t segment;
  };
  std::int64_t key(std::int64_t cx, std::int64_t cy) const;
  std::int64_t cell_of(double v) const;

  const RoadGraph* graph_;
  double cell_size_;
  std::unordered_map<std::int64_t, std::vector<SegmentRef>> cells_;
  std::int64_t min_cx_ = 0, max_cx_ = 0, min_cy_ = 0, max_cy_ = 0;
};

}  // namespace roadinfer

#endif  // ROADINFER_GEOMETRY_H_
