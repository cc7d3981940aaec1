#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.h"
#include "roadinfer/error.h"
#include "roadinfer/mapmatch.h"
#include "roadinfer/synth.h"

using namespace roadinfer;

namespace {

RoadGraph star(const std::vector<Provenance>& arms) {
  RoadGraph g;
  const NodeId c = g.add_node({0, 0, 0});
  for (std::size_t i = 0; i < arms.size(); ++i) {
    const double a = 2 * M_PI * static_cast<double>(i) / static_cast<double>(arms.size());
    g.add_edge(c, g.add_node({50 * std::cos(a), 50 * std::sin(a), 0}), {}, arms[i]);
  }
  return g;
}

GnssTrace line_trace(TraceId id, LocalPoint from, LocalPoint to, int n) {
  GnssTrace t;
  t.trace_id = id;
  for (int i = 0; i < n; ++i) {
    const double f = static_cast<double>(i) / (n - 1);
    t.points.push_back({from.x + f * (to.x - from.x), from.y + f * (to.y - from.y), 0});
  }
  return t;
}

MatchResult result(TraceId id, std::vector<std::optional<EdgeId>> a) {
  MatchResult r;
  r.trace_id = id;
  r.assignments = std::move(a);
  return r;
}

}  // namespace

TEST_CASE("edge_transition_prob") {
  using P = Provenance;
  const RoadGraph three = star({P::kSegmentation, P::kSegmentation, P::kSegmentation});
  const MatchConfig uniform;
  for (const auto& [id, e] : three.edges()) {
    CHECK(edge_transition_prob(NodeId{0}, id, three, uniform) == doctest::Approx(1.0 / 3));
  }
  CHECK_THROWS_AS(edge_transition_prob(NodeId{1}, EdgeId{1}, three, uniform), InvalidInputError);

  const RoadGraph mixed = star({P::kGapFill, P::kSegmentation, P::kSegmentation});
  MatchConfig w;
  w.alpha_gap = 0.25;
  CHECK(std::abs(edge_transition_prob(NodeId{0}, EdgeId{0}, mixed, w) - 1.0 / 9) < 1e-12);
  CHECK(std::abs(edge_transition_prob(NodeId{0}, EdgeId{1}, mixed, w) - 4.0 / 9) < 1e-12);

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> alpha(0.01, 5.0), scale(0.001, 1000.0);
  for (int i = 0; i < 200; ++i) {
    const RoadGraph g = star({P::kGapFill, P::kSegmentation, P::kGapFill, P::kSegmentation,
                              P::kSegmentation});
    MatchConfig c;
    c.alpha_seg = alpha(rng);
    c.alpha_gap = std::min(alpha(rng), c.alpha_seg);
    MatchConfig scaled = c;
    const double k = scale(rng);
    scaled.alpha_seg *= k;
    scaled.alpha_gap *= k;
    double sum = 0;
    for (const auto& [id, e] : g.edges()) {
      const double p = edge_transition_prob(NodeId{0}, id, g, c);
      sum += p;
      CHECK(std::abs(p - edge_transition_prob(NodeId{0}, id, g, scaled)) < 1e-12);
    }
    CHECK(std::abs(sum - 1.0) < 1e-12);
  }

  MatchConfig bad;
  bad.alpha_gap = 2.0;
  CHECK_THROWS_AS(bad.validate(), InvalidInputError);
  CHECK(MatchConfig{}.uniform().alpha_gap == MatchConfig{}.alpha_seg);
}

TEST_CASE("match_trace examples") {
  RoadGraph g;
  const EdgeId e = oracle::add_road(g, {0, 0, 0}, {200, 0, 0});
  oracle::add_road(g, {0, 80, 0}, {200, 80, 0});
  const MapMatcher m(g, MatchConfig{});
  const MatchResult r = match_trace(line_trace(1, {10, 0, 0}, {190, 0, 0}, 20), m);
  CHECK(r.trace_id == 1);
  for (const auto& a : r.assignments) CHECK(a == e);

  GnssTrace off = line_trace(2, {10, 0, 0}, {190, 0, 0}, 5);
  off.points[2] = {100, 180, 0};
  const MatchResult ro = m.match(off);
  CHECK(!ro.assignments[2].has_value());
  CHECK(std::isnan(ro.arc_offsets[2]));
  CHECK(ro.assignments[1] == e);
  CHECK(ro.assignments[3] == e);

  GnssTrace single;
  single.points = {{0, 0, 0}};
  CHECK_THROWS_AS(m.match(single), InvalidInputError);
  CHECK_THROWS_AS(MapMatcher(RoadGraph{}, MatchConfig{}), InvalidInputError);
}

TEST_CASE("ten points through a crossing equal exhaustive enumeration") {
  ScenarioSpec spec;
  spec.name = Scenario::kIntersection;
  spec.extent = 200;
  const RoadGraph g = make_ground_truth(spec);
  MatchConfig cfg;
  cfg.max_candidates = 4;
  const MapMatcher m(g, cfg);
  std::mt19937_64 rng(12);
  std::normal_distribution<double> jitter(0, 2.5);
  for (int k = 0; k < 10; ++k) {
    GnssTrace t;
    for (int i = 0; i < 10; ++i) {
      // West arm into the center, then north.
      const double s = 60 + 8 * i;
      const LocalPoint p = s <= 100 ? LocalPoint{s, 100, 0} : LocalPoint{100, s, 0};
      t.points.push_back({p.x + jitter(rng), p.y + jitter(rng), 0});
    }
    const MatchLattice lat = m.build_lattice(t);
    const oracle::MapSearch best = oracle::brute_force_map(lat);
    REQUIRE(best.best > oracle::kNegInf);
    const MatchResult r = m.match(t);
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < t.points.size(); ++i) {
      REQUIRE(r.assignments[i].has_value());
      for (std::size_t j = 0; j < lat.candidates[i].size(); ++j) {
        if (lat.candidates[i][j].edge == *r.assignments[i]) idx.push_back(j);
      }
    }
    REQUIRE(idx.size() == t.points.size());
    CHECK(std::abs(oracle::path_score(lat, idx) - best.best) < 1e-9);
    CHECK(std::find(best.argmax.begin(), best.argmax.end(), idx) != best.argmax.end());
  }
}

TEST_CASE("viterbi chain handling") {
  MatchLattice lat;
  EdgeCandidate a, b;
  a.edge = EdgeId{0};
  b.edge = EdgeId{1};
  lat.candidates = {{a, b}, {}, {a, b}, {a, b}};
  lat.emission = {{-1, -2}, {}, {-3, -1}, {-1, -1}};
  const double ninf = oracle::kNegInf;
  lat.transition = {{}, {}, {}, {{0, ninf}, {ninf, -0.5}}};
  const auto out = viterbi_decode(lat);
  REQUIRE(out.size() == 4);
  CHECK(out[0] == 0);
  CHECK(!out[1].has_value());
  CHECK(out[2] == 1);
  CHECK(out[3] == 1);

  // Nothing reachable: the second half is decoded on its own.
  lat.transition[3] = {{ninf, ninf}, {ninf, ninf}};
  const auto split = viterbi_decode(lat);
  CHECK(split[2] == 1);
  CHECK(split[3].has_value());
}

TEST_CASE("match_all keeps order and ignores worker count") {
  const RoadGraph g = make_ground_truth(ScenarioSpec{});
  const TraceSample s = sample_traces(g, 1, NoiseModel{}, RoutePolicy::kAllShortestPaths, 3);
  const MapMatcher m(g, MatchConfig{});
  const auto one = m.match_all(s.traces, 1);
  const auto four = m.match_all(s.traces, 4);
  REQUIRE(one.size() == s.traces.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    CHECK(one[i].trace_id == s.traces[i].trace_id);
    CHECK(one[i].assignments == four[i].assignments);
  }
}

TEST_CASE("edge_support") {
  CHECK(edge_support({}).empty());
  const EdgeId e{7};
  CHECK(edge_support({result(1, {e, e, e, e})}).at(e) == 1);
  std::vector<MatchResult> five;
  for (int i = 0; i < 5; ++i) five.push_back(result(i, {e, std::nullopt, e}));
  CHECK(edge_support(five).at(e) == 5);
}

TEST_CASE("transition_counts") {
  RoadGraph g;
  const NodeId a = g.add_node({0, 0, 0}), b = g.add_node({10, 0, 0}), c = g.add_node({20, 0, 0});
  const NodeId far = g.add_node({50, 50, 0}), far2 = g.add_node({60, 50, 0});
  const EdgeId e1 = g.add_edge(a, b, {}, Provenance::kSegmentation);
  const EdgeId e2 = g.add_edge(b, c, {}, Provenance::kSegmentation);
  const EdgeId e3 = g.add_edge(far, far2, {}, Provenance::kSegmentation);

  const TransitionCounts one = transition_counts({result(0, {e1, e1, e2, e2})}, g);
  CHECK(one.count(e1, e2) == 1);
  CHECK(one.count(b, e2, e1) == 1);
  CHECK(one.counts().size() == 1);

  const TransitionCounts broken = transition_counts({result(0, {e1, std::nullopt, e2})}, g);
  CHECK(broken.counts().empty());

  const TransitionCounts back = transition_counts({result(0, {e1, e2, e1, e2})}, g);
  CHECK(back.count(e1, e2) == 3);

  const TransitionCounts jump = transition_counts({result(0, {e1, e3})}, g);
  CHECK(jump.counts().empty());
  CHECK(jump.skipped == 1);
}

TEST_CASE("straight-through traffic at a crossing") {
  ScenarioSpec spec;
  spec.name = Scenario::kIntersection;
  const RoadGraph g = make_ground_truth(spec);
  const TraceSample s = sample_traces(g, 5, NoiseModel{}, RoutePolicy::kStraightThroughOnly, 6);
  const NodeId center = oracle::nearest_node(g, {500, 500, 0});
  const EdgeId west = g.edges_between(center, oracle::nearest_node(g, {0, 500, 0}))[0];
  const EdgeId east = g.edges_between(center, oracle::nearest_node(g, {1000, 500, 0}))[0];
  // Five traces driven west to east.
  std::vector<GnssTrace> through;
  for (const auto& t : s.traces) {
    const auto& o = s.oracle.edges.at(t.trace_id);
    if (o.front() == west && o.back() == east) through.push_back(t);
  }
  REQUIRE(through.size() == 5);
  const MapMatcher m(g, MatchConfig{});
  const TransitionCounts tc = transition_counts(m.match_all(through), g);
  CHECK(tc.count(center, west, east) == 5);
  int turning = 0;
  for (const auto& [key, n] : tc.counts()) {
    const auto [v, x, y] = key;
    if (!((x == west && y == east) || (x == east && y == west))) turning += n;
  }
  CHECK(turning == 0);
}

TEST_CASE("lower gap weight never attracts more traces") {
  // A straight gap-fill edge competing with a bent segmentation edge.
  RoadGraph g;
  const NodeId a = g.add_node({0, 0, 0}), b = g.add_node({100, 0, 0}), c = g.add_node({200, 0, 0});
  g.add_edge(a, b, {}, Provenance::kSegmentation);
  const EdgeId gap = g.add_edge(b, c, {}, Provenance::kGapFill);
  g.add_edge(b, c, {{100, 0, 0}, {150, 9, 0}, {200, 0, 0}}, Provenance::kSegmentation);
  std::vector<GnssTrace> traces;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> jitter(4.0, 3.0);
    GnssTrace t;
    t.trace_id = static_cast<TraceId>(seed);
    for (double x = 0; x <= 200; x += 10) t.points.push_back({x, jitter(rng), 0});
    traces.push_back(t);
  }
  int prev = static_cast<int>(traces.size()) + 1;
  for (double ag : {1.0, 0.6, 0.3, 0.1, 0.03, 0.01}) {
    MatchConfig cfg;
    cfg.alpha_gap = ag;
    const MapMatcher m(g, cfg);
    const auto support = edge_support(m.match_all(traces));
    const int n = support.count(gap) ? support.at(gap) : 0;
    CHECK(n <= prev);
    prev = n;
  }
}
