#ifndef ROADINFER_CORE_H_
#define ROADINFER_CORE_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string_view>
#include <vector>

namespace roadinfer {

// Strongly typed graph identifiers. Scoped enums give ordering, hashing and
// no implicit conversion from other integers.
enum class NodeId : std::int64_t {};
enum class EdgeId : std::int64_t {};
using TraceId = std::int64_t;

constexpr std::int64_t to_int(NodeId id) { return static_cast<std::int64_t>(id); }
constexpr std::int64_t to_int(EdgeId id) { return static_cast<std::int64_t>(id); }

// Tangent-plane frame anchored at a geographic origin.
struct LocalFrame {
  static constexpr double kEarthRadius = 6378137.0;

  double origin_lat = 0.0;  // degrees
  double origin_lon = 0.0;  // degrees

  // Throws InvalidInputError unless |lat| <= 90 and |lon| <= 180.
  void validate() const;
};

// Metric position relative to a LocalFrame: x east, y north, z up.
struct LocalPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const LocalPoint&, const LocalPoint&) = default;
};

// Equirectangular projection of a geographic position into `frame`.
LocalPoint project_to_local(double lat, double lon, double alt,
                            const LocalFrame& frame);

// Inverse of project_to_local. Returns {lat, lon, alt}.
LocalPoint unproject_from_local(const LocalPoint& p, const LocalFrame& frame);

// Planar (XY) distance; z is ignored.
double distance_xy(const LocalPoint& a, const LocalPoint& b);

struct GnssTrace {
  TraceId trace_id = 0;
  std::vector<LocalPoint> points;  // travel order
};

enum class SemanticClass : std::uint8_t { kLaneMarking, kRoadBoundary };

std::string_view to_string(SemanticClass c);
SemanticClass semantic_class_from_string(std::string_view s);

struct SemanticPoint {
  LocalPoint position;
  SemanticClass semantic_class = SemanticClass::kLaneMarking;
};

struct FleetDataset {
  LocalFrame frame;
  std::vector<GnssTrace> traces;
  std::vector<SemanticPoint> points;
};

enum class Provenance : std::uint8_t { kSegmentation, kGapFill, kGroundTruth };

std::string_view to_string(Provenance p);
Provenance provenance_from_string(std::string_view s);

struct Edge {
  NodeId a{};
  NodeId b{};
  std::vector<LocalPoint> polyline;  // runs from node a to node b
  Provenance provenance = Provenance::kSegmentation;

  bool is_self_loop() const { return a == b; }
  NodeId other(NodeId n) const { return n == a ? b : a; }
};

// Undirected road graph. Nodes are intersections or dead ends, edges carry
// centerline polylines whose endpoints coincide with their node positions.
//
// Stages treat graphs as values: transformations take a const reference and
// return a new graph. The mutators below exist for building those results.
class RoadGraph {
 public:
  static constexpr double kEndpointTolerance = 1e-6;

  RoadGraph() = default;
  explicit RoadGraph(LocalFrame frame) : frame_(frame) {}

  const LocalFrame& frame() const { return frame_; }
  void set_frame(const LocalFrame& frame) { frame_ = frame; }

  const std::map<NodeId, LocalPoint>& nodes() const { return nodes_; }
  const std::map<EdgeId, Edge>& edges() const { return edges_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  bool empty() const { return nodes_.empty(); }

  bool has_node(NodeId id) const { return nodes_.contains(id); }
  bool has_edge(EdgeId id) const { return edges_.contains(id); }
  const LocalPoint& node(NodeId id) const;
  const Edge& edge(EdgeId id) const;

  // Edges having `id` as an endpoint, ascending; a self-loop appears once.
  const std::vector<EdgeId>& incident_edges(NodeId id) const;
  // Number of edge ends at the node; a self-loop counts twice.
  int degree(NodeId id) const;
  // Sum of XY segment lengths of the edge polyline.
  double edge_length(EdgeId id) const;
  // Edges connecting a and b (either orientation).
  std::vector<EdgeId> edges_between(NodeId a, NodeId b) const;

  NodeId add_node(const LocalPoint& p);
  void add_node(NodeId id, const LocalPoint& p);
  // Adds an edge with a fresh id. An empty polyline becomes the straight
  // segment between the node positions. Endpoints are snapped onto the nodes.
  EdgeId add_edge(NodeId a, NodeId b, std::vector<LocalPoint> polyline,
                  Provenance provenance);
  void add_edge(EdgeId id, NodeId a, NodeId b,
                std::vector<LocalPoint> polyline, Provenance provenance);
  void remove_edge(EdgeId id);
  // Removes the node and all incident edges.
  void remove_node(NodeId id);
  void move_node(NodeId id, const LocalPoint& p);
  // Replaces an edge's geometry; endpoints are snapped onto its nodes.
  void set_polyline(EdgeId id, std::vector<LocalPoint> polyline);
  // Replaces an edge's endpoint node (re-anchors the matching polyline end).
  void reattach_edge_end(EdgeId id, NodeId from, NodeId to);
  // Removes every node without incident edges.
  void drop_isolated_nodes();

  NodeId next_node_id() const { return next_node_; }
  EdgeId next_edge_id() const { return next_edge_; }

  // Throws InvariantError when endpoint coincidence, referential integrity,
  // or positive edge length does not hold.
  void validate() const;

  // Bounding box of all node and polyline coordinates (XY); nullopt if empty.
  std::optional<std::pair<LocalPoint, LocalPoint>> bounds() const;

  double total_length() const;

 private:
  void link(EdgeId id, const Edge& e);
  void unlink(EdgeId id, const Edge& e);

  LocalFrame frame_;
  std::map<NodeId, LocalPoint> nodes_;
  std::map<EdgeId, Edge> edges_;
  std::map<NodeId, std::vector<EdgeId>> adjacency_;
  NodeId next_node_{0};
  EdgeId next_edge_{0};
};

// Free-function forms of the RoadGraph queries.
std::vector<EdgeId> incident_edges(const RoadGraph& graph, NodeId node);
double edge_length(const RoadGraph& graph, EdgeId edge);

// XY length of a polyline.
double polyline_length(const std::vector<LocalPoint>& polyline);

}  // namespace roadinfer

#endif  // ROADINFER_CORE_H_
