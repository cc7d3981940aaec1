#include "roadinfer/core.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "roadinfer/error.h"

namespace roadinfer {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

bool finite(const LocalPoint& p) {
  return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z);
}

std::string node_str(NodeId id) { return std::to_string(to_int(id)); }
std::string edge_str(EdgeId id) { return std::to_string(to_int(id)); }

}  // namespace

void LocalFrame::validate() const {
  if (!std::isfinite(origin_lat) || !std::isfinite(origin_lon) ||
      std::abs(origin_lat) > 90.0 || std::abs(origin_lon) > 180.0) {
    throw InvalidInputError("local frame origin out of range");
  }
}

LocalPoint project_to_local(double lat, double lon, double alt,
                            const LocalFrame& frame) {
  frame.validate();
  if (!std::isfinite(lat) || !std::isfinite(lon) || !std::isfinite(alt)) {
    throw InvalidInputError("non-finite coordinate");
  }
  if (std::abs(lat) > 90.0) {
    throw InvalidInputError("latitude out of range: " + std::to_string(lat));
  }
  const double cos_lat0 = std::cos(frame.origin_lat * kDegToRad);
  return {LocalFrame::kEarthRadius * cos_lat0 * (lon - frame.origin_lon) *
              kDegToRad,
          LocalFrame::kEarthRadius * (lat - frame.origin_lat) * kDegToRad,
          alt};
}

LocalPoint unproject_from_local(const LocalPoint& p, const LocalFrame& frame) {
  frame.validate();
  const double cos_lat0 = std::cos(frame.origin_lat * kDegToRad);
  return {frame.origin_lat + p.y / LocalFrame::kEarthRadius / kDegToRad,
          frame.origin_lon +
              p.x / (LocalFrame::kEarthRadius * cos_lat0) / kDegToRad,
          p.z};
}

double distance_xy(const LocalPoint& a, const LocalPoint& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

std::string_view to_string(SemanticClass c) {
  return c == SemanticClass::kLaneMarking ? "LaneMarking" : "RoadBoundary";
}

SemanticClass semantic_class_from_string(std::string_view s) {
  if (s == "LaneMarking") return SemanticClass::kLaneMarking;
  if (s == "RoadBoundary") return SemanticClass::kRoadBoundary;
  throw InvalidInputError("unknown semantic class: " + std::string(s));
}

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::kSegmentation:
      return "Segmentation";
    case Provenance::kGapFill:
      return "GapFill";
    case Provenance::kGroundTruth:
      return "GroundTruth";
  }
  return "Segmentation";
}

Provenance provenance_from_string(std::string_view s) {
  if (s == "Segmentation") return Provenance::kSegmentation;
  if (s == "GapFill") return Provenance::kGapFill;
  if (s == "GroundTruth") return Provenance::kGroundTruth;
  throw InvalidInputError("unknown provenance: " + std::string(s));
}

double polyline_length(const std::vector<LocalPoint>& polyline) {
  double len = 0.0;
  for (std::size_t i = 1; i < polyline.size(); ++i) {
    len += distance_xy(polyline[i - 1], polyline[i]);
  }
  return len;
}

const LocalPoint& RoadGraph::node(NodeId id) const {
  const auto it = nodes_.find(id);
  if (it == nodes_.end()) throw NotFoundError("unknown node " + node_str(id));
  return it->second;
}

const Edge& RoadGraph::edge(EdgeId id) const {
  const auto it = edges_.find(id);
  if (it == edges_.end()) throw NotFoundError("unknown edge " + edge_str(id));
  return it->second;
}

const std::vector<EdgeId>& RoadGraph::incident_edges(NodeId id) const {
  const auto it = adjacency_.find(id);
  if (it == adjacency_.end()) {
    throw NotFoundError("unknown node " + node_str(id));
  }
  return it->second;
}

int RoadGraph::degree(NodeId id) const {
  int d = 0;
  for (EdgeId e : incident_edges(id)) d += edges_.at(e).is_self_loop() ? 2 : 1;
  return d;
}

double RoadGraph::edge_length(EdgeId id) const {
  return polyline_length(edge(id).polyline);
}

std::vector<EdgeId> RoadGraph::edges_between(NodeId a, NodeId b) const {
  std::vector<EdgeId> out;
  for (EdgeId e : incident_edges(a)) {
    if (edges_.at(e).other(a) == b) out.push_back(e);
  }
  return out;
}

NodeId RoadGraph::add_node(const LocalPoint& p) {
  const NodeId id = next_node_;
  add_node(id, p);
  return id;
}

void RoadGraph::add_node(NodeId id, const LocalPoint& p) {
  if (!finite(p)) throw InvalidInputError("non-finite node position");
  if (nodes_.contains(id)) {
    throw InvalidInputError("duplicate node id " + node_str(id));
  }
  nodes_.emplace(id, p);
  adjacency_[id];
  if (to_int(id) >= to_int(next_node_)) next_node_ = NodeId{to_int(id) + 1};
}

EdgeId RoadGraph::add_edge(NodeId a, NodeId b, std::vector<LocalPoint> polyline,
                           Provenance provenance) {
  const EdgeId id = next_edge_;
  add_edge(id, a, b, std::move(polyline), provenance);
  return id;
}

void RoadGraph::add_edge(EdgeId id, NodeId a, NodeId b,
                         std::vector<LocalPoint> polyline,
                         Provenance provenance) {
  if (edges_.contains(id)) {
    throw InvalidInputError("duplicate edge id " + edge_str(id));
  }
  const LocalPoint pa = node(a);
  const LocalPoint pb = node(b);
  if (polyline.size() < 2) polyline = {pa, pb};
  for (const auto& p : polyline) {
    if (!finite(p)) throw InvalidInputError("non-finite polyline vertex");
  }
  polyline.front() = pa;
  polyline.back() = pb;
  Edge e{a, b, std::move(polyline), provenance};
  if (polyline_length(e.polyline) <= 0.0) {
    throw InvalidInputError("zero-length edge " + edge_str(id));
  }
  link(id, e);
  edges_.emplace(id, std::move(e));
  if (to_int(id) >= to_int(next_edge_)) next_edge_ = EdgeId{to_int(id) + 1};
}

void RoadGraph::remove_edge(EdgeId id) {
  const auto it = edges_.find(id);
  if (it == edges_.end()) throw NotFoundError("unknown edge " + edge_str(id));
  unlink(id, it->second);
  edges_.erase(it);
}

void RoadGraph::remove_node(NodeId id) {
  const std::vector<EdgeId> incident = incident_edges(id);
  for (EdgeId e : incident) remove_edge(e);
  nodes_.erase(id);
  adjacency_.erase(id);
}

void RoadGraph::move_node(NodeId id, const LocalPoint& p) {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw NotFoundError("unknown node " + node_str(id));
  it->second = p;
  for (EdgeId eid : adjacency_.at(id)) {
    Edge& e = edges_.at(eid);
    if (e.a == id) e.polyline.front() = p;
    if (e.b == id) e.polyline.back() = p;
  }
}

void RoadGraph::set_polyline(EdgeId id, std::vector<LocalPoint> polyline) {
  auto it = edges_.find(id);
  if (it == edges_.end()) throw NotFoundError("unknown edge " + edge_str(id));
  if (polyline.size() < 2) throw InvalidInputError("polyline needs 2 vertices");
  polyline.front() = node(it->second.a);
  polyline.back() = node(it->second.b);
  it->second.polyline = std::move(polyline);
}

void RoadGraph::reattach_edge_end(EdgeId id, NodeId from, NodeId to) {
  auto it = edges_.find(id);
  if (it == edges_.end()) throw NotFoundError("unknown edge " + edge_str(id));
  const LocalPoint target = node(to);
  Edge e = it->second;
  unlink(id, e);
  if (e.a == from) {
    e.a = to;
    e.polyline.front() = target;
  } else if (e.b == from) {
    e.b = to;
    e.polyline.back() = target;
  } else {
    link(id, e);
    throw InvalidInputError("edge " + edge_str(id) + " is not incident to node " +
                            node_str(from));
  }
  link(id, e);
  it->second = std::move(e);
}

void RoadGraph::drop_isolated_nodes() {
  std::vector<NodeId> isolated;
  for (const auto& [id, edges] : adjacency_) {
    if (edges.empty()) isolated.push_back(id);
  }
  for (NodeId id : isolated) {
    nodes_.erase(id);
    adjacency_.erase(id);
  }
}

void RoadGraph::validate() const {
  for (const auto& [id, e] : edges_) {
    const auto a = nodes_.find(e.a);
    const auto b = nodes_.find(e.b);
    if (a == nodes_.end() || b == nodes_.end()) {
      throw InvariantError("edge " + edge_str(id) + " references a missing node");
    }
    if (e.polyline.size() < 2) {
      throw InvariantError("edge " + edge_str(id) + " has fewer than 2 vertices");
    }
    if (distance_xy(e.polyline.front(), a->second) > kEndpointTolerance ||
        distance_xy(e.polyline.back(), b->second) > kEndpointTolerance) {
      throw InvariantError("edge " + edge_str(id) +
                           " polyline does not end at its nodes");
    }
    if (polyline_length(e.polyline) <= 0.0) {
      throw InvariantError("edge " + edge_str(id) + " has zero length");
    }
    const auto& adj_a = adjacency_.at(e.a);
    const auto& adj_b = adjacency_.at(e.b);
    if (!std::binary_search(adj_a.begin(), adj_a.end(), id) ||
        !std::binary_search(adj_b.begin(), adj_b.end(), id)) {
      throw InvariantError("adjacency out of sync for edge " + edge_str(id));
    }
  }
}

std::optional<std::pair<LocalPoint, LocalPoint>> RoadGraph::bounds() const {
  if (nodes_.empty()) return std::nullopt;
  LocalPoint lo = nodes_.begin()->second;
  LocalPoint hi = lo;
  auto grow = [&](const LocalPoint& p) {
    lo.x = std::min(lo.x, p.x);
    lo.y = std::min(lo.y, p.y);
    hi.x = std::max(hi.x, p.x);
    hi.y = std::max(hi.y, p.y);
  };
  for (const auto& [id, p] : nodes_) grow(p);
  for (const auto& [id, e] : edges_) {
    for (const auto& p : e.polyline) grow(p);
  }
  return std::make_pair(lo, hi);
}

double RoadGraph::total_length() const {
  double len = 0.0;
  for (const auto& [id, e] : edges_) len += polyline_length(e.polyline);
  return len;
}

void RoadGraph::link(EdgeId id, const Edge& e) {
  auto insert = [&](NodeId n) {
    auto& list = adjacency_.at(n);
    const auto pos = std::lower_bound(list.begin(), list.end(), id);
    if (pos == list.end() || *pos != id) list.insert(pos, id);
  };
  insert(e.a);
  insert(e.b);
}

void RoadGraph::unlink(EdgeId id, const Edge& e) {
  auto erase = [&](NodeId n) {
    auto& list = adjacency_.at(n);
    const auto pos = std::lower_bound(list.begin(), list.end(), id);
    if (pos != list.end() && *pos == id) list.erase(pos);
  };
  erase(e.a);
  erase(e.b);
}

std::vector<EdgeId> incident_edges(const RoadGraph& graph, NodeId node) {
  return graph.incident_edges(node);
}

double edge_length(const RoadGraph& graph, EdgeId edge) {
  return graph.edge_length(edge);
}

}  // namespace roadinfer
