#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "oracles.h"
#include "roadinfer/core.h"
#include "roadinfer/error.h"
#include "roadinfer/geometry.h"

using namespace roadinfer;

TEST_CASE("project_to_local") {
  const LocalFrame frame{48.1, 11.5};
  const LocalPoint o = project_to_local(48.1, 11.5, 520.0, frame);
  CHECK(o.x == 0.0);
  CHECK(o.y == 0.0);
  CHECK(o.z == 520.0);

  const LocalPoint p = project_to_local(0.0, 0.001, 0.0, LocalFrame{0.0, 0.0});
  CHECK(std::abs(p.x - 111.319) < 1e-3);
  CHECK(p.y == 0.0);

  CHECK_THROWS_AS(project_to_local(91.0, 0.0, 0.0, frame), InvalidInputError);
  CHECK_THROWS_AS(project_to_local(std::nan(""), 0.0, 0.0, frame), InvalidInputError);
  CHECK_THROWS_AS(LocalFrame({95.0, 0.0}).validate(), InvalidInputError);

  const LocalPoint back = unproject_from_local(project_to_local(48.2, 11.4, 3.0, frame), frame);
  CHECK(back.x == doctest::Approx(48.2).epsilon(1e-12));
  CHECK(back.y == doctest::Approx(11.4).epsilon(1e-12));
}

TEST_CASE("incident_edges") {
  RoadGraph g;
  const NodeId c = g.add_node({0, 0, 0});
  const NodeId lone = g.add_node({50, 50, 0});
  for (LocalPoint p : {LocalPoint{10, 0, 0}, {-10, 0, 0}, {0, 10, 0}, {0, -10, 0}}) {
    g.add_edge(c, g.add_node(p), {}, Provenance::kGroundTruth);
  }
  CHECK(incident_edges(g, lone).empty());
  CHECK(incident_edges(g, c).size() == 4);
  CHECK_THROWS_AS(incident_edges(g, NodeId{99}), NotFoundError);
}

TEST_CASE("edge_length") {
  RoadGraph g;
  const NodeId a = g.add_node({0, 0, 0});
  const NodeId b = g.add_node({3, 4, 7});
  const NodeId c = g.add_node({1, 1, 0});
  const EdgeId e1 = g.add_edge(a, b, {}, Provenance::kGroundTruth);
  const EdgeId e2 = g.add_edge(a, c, {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}}, Provenance::kGroundTruth);
  CHECK(edge_length(g, e1) == 5.0);
  CHECK(edge_length(g, e2) == 2.0);
  CHECK_THROWS_AS(edge_length(g, EdgeId{42}), NotFoundError);
}

TEST_CASE("self-loops count once in adjacency and twice in degree") {
  RoadGraph g;
  const NodeId a = g.add_node({0, 0, 0});
  const EdgeId loop = g.add_edge(a, a, {{0, 0, 0}, {10, 0, 0}, {10, 10, 0}, {0, 0, 0}},
                                 Provenance::kSegmentation);
  CHECK(g.incident_edges(a) == std::vector<EdgeId>{loop});
  CHECK(g.degree(a) == 2);
  g.validate();
}

TEST_CASE("graph mutation keeps integrity") {
  RoadGraph g;
  const EdgeId e = oracle::add_road(g, {0, 0, 0}, {10, 0, 0});
  const NodeId b{1};
  const NodeId c = g.add_node({20, 5, 0});
  g.reattach_edge_end(e, b, c);
  CHECK(g.edge(e).b == c);
  CHECK(g.edge(e).polyline.back() == g.node(c));
  g.validate();
  g.move_node(c, {30, 0, 0});
  CHECK(g.edge(e).polyline.back().x == 30.0);
  g.validate();
  g.drop_isolated_nodes();
  CHECK_FALSE(g.has_node(b));
  g.remove_node(c);
  CHECK(g.edge_count() == 0);
  CHECK_THROWS_AS(g.add_edge(NodeId{0}, NodeId{0}, {}, Provenance::kSegmentation),
                  InvalidInputError);
}

TEST_CASE("degree sum is twice the edge count") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> coord(0, 100);
  for (int trial = 0; trial < 20; ++trial) {
    RoadGraph g;
    std::vector<NodeId> ids;
    for (int i = 0; i < 15; ++i) ids.push_back(g.add_node({coord(rng), coord(rng), 0}));
    for (int k = 0; k < 30; ++k) {
      const NodeId a = ids[rng() % ids.size()], b = ids[rng() % ids.size()];
      if (a != b) g.add_edge(a, b, {}, Provenance::kSegmentation);
    }
    std::size_t sum = 0;
    for (const auto& [id, p] : g.nodes()) sum += g.incident_edges(id).size();
    CHECK(sum == 2 * g.edge_count());
    g.validate();
  }
}

TEST_CASE("polyline geometry helpers") {
  const std::vector<LocalPoint> pl = {{0, 0, 0}, {10, 0, 0}, {10, 10, 0}};
  const PolylineProjection pr = project_onto_polyline(pl, {12, 4, 0});
  CHECK(pr.distance == doctest::Approx(2.0));
  CHECK(pr.arc_offset == doctest::Approx(14.0));
  CHECK(point_at_arc(pl, 15).y == doctest::Approx(5.0));
  CHECK(polyline_length(sub_polyline(pl, 5, 15)) == doctest::Approx(10.0));
  CHECK(angle_between_deg({1, 0}, {0, 1}) == doctest::Approx(90.0));
}

TEST_CASE("edge index queries") {
  RoadGraph g;
  const EdgeId e = oracle::add_road(g, {0, 0, 0}, {100, 0, 0});
  oracle::add_road(g, {0, 40, 0}, {100, 40, 0});
  const EdgeIndex index(g);
  CHECK(index.query_radius({50, 1000, 0}, 25).empty());
  const auto hits = index.query_radius({30, 0, 0}, 25);
  REQUIRE(!hits.empty());
  CHECK(hits.front().edge == e);
  CHECK(hits.front().projection.distance < 1e-12);
  CHECK(index.query_nearest({30, 30, 0}, 1).front().edge != e);
  CHECK_THROWS_AS(EdgeIndex(RoadGraph{}), InvalidInputError);
}
