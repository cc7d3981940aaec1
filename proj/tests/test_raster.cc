#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "roadinfer/error.h"
#include "roadinfer/raster.h"

using namespace roadinfer;

namespace {

TileSpec small_tile(int w, int h, LocalPoint origin = {}) {
  TileSpec s;
  s.origin = origin;
  s.width_px = w;
  s.height_px = h;
  return s;
}

// Closed pixel square [c - 0.5, c + 0.5]^2 touched by the segment between
// two pixel centers (Liang-Barsky clip).
bool segment_touches_cell(double x0, double y0, double x1, double y1, int cx, int cy) {
  const double eps = 1e-9;
  double t0 = 0.0, t1 = 1.0;
  const double dx = x1 - x0, dy = y1 - y0;
  const double p[4] = {-dx, dx, -dy, dy};
  const double q[4] = {x0 - (cx - 0.5) + eps, (cx + 0.5) - x0 + eps, y0 - (cy - 0.5) + eps,
                       (cy + 0.5) - y0 + eps};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return false;
      continue;
    }
    const double r = q[i] / p[i];
    if (p[i] < 0.0) {
      t0 = std::max(t0, r);
    } else {
      t1 = std::min(t1, r);
    }
  }
  return t0 <= t1;
}

}  // namespace

TEST_CASE("plan_tiles") {
  const TileSpec tmpl;
  const TileGrid one = plan_tiles({0, 0, 0}, {1000, 1000, 0}, tmpl);
  CHECK(one.tiles.size() == 1);

  const TileGrid two = plan_tiles({0, 0, 0}, {1500, 1000, 0}, tmpl);
  REQUIRE(two.tiles.size() == 2);
  CHECK(two.tiles[1].origin.x - two.tiles[0].origin.x == 500.0);

  const TileGrid many = plan_tiles({-10, -20, 0}, {3100, 2700, 0}, tmpl);
  for (std::size_t i = 1; i < many.tiles.size(); ++i) {
    if (many.indices[i].y == many.indices[i - 1].y) {
      CHECK(many.tiles[i].origin.x - many.tiles[i - 1].origin.x == 500.0);
    }
  }
  const TileSpec& last = many.tiles.back();
  CHECK(last.origin.x + last.width_m() >= 3100);
  CHECK(last.origin.y + last.height_m() >= 2700);

  CHECK_THROWS_AS(plan_tiles({5, 5, 0}, {5, 5, 0}, tmpl), InvalidInputError);
}

TEST_CASE("rasterize_traces examples") {
  const TileSpec spec = small_tile(8, 4);
  GnssTrace t;
  t.points = {{0.5, 0.5, 0}, {3.5, 0.5, 0}};
  const RasterTile r = rasterize_traces({t}, spec);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 8; ++x) CHECK(r.at(x, y) == (y == 0 && x < 4 ? 1.0 : 0.0));
  }
  const RasterTile empty = rasterize_traces({}, spec);
  CHECK(std::all_of(empty.values.begin(), empty.values.end(), [](double v) { return v == 0; }));

  GnssTrace bent;
  bent.points = {{0.5, 0.5, 0}, {5.2, 2.7, 0}, {7.9, 0.1, 0}};
  const RasterTile once = rasterize_traces({bent}, spec);
  const RasterTile twice = rasterize_traces({bent, bent}, spec);
  for (std::size_t i = 0; i < once.values.size(); ++i) CHECK(twice.values[i] == 2 * once.values[i]);
  // The shared vertex pixel is counted once.
  CHECK(once.at(5, 2) == 1.0);

  GnssTrace outside;
  outside.points = {{-50, -50, 0}, {-20, -40, 0}};
  const RasterTile clipped = rasterize_traces({outside}, spec);
  CHECK(std::all_of(clipped.values.begin(), clipped.values.end(), [](double v) { return v == 0; }));
}

TEST_CASE("bresenham cells against a supercover oracle") {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> c(-40, 40);
  for (int i = 0; i < 1000; ++i) {
    const int x0 = c(rng), y0 = c(rng), x1 = c(rng), y1 = c(rng);
    std::set<std::pair<std::int64_t, std::int64_t>> cells;
    int visits = 0;
    bresenham_line(x0, y0, x1, y1, [&](std::int64_t x, std::int64_t y) {
      cells.insert({x, y});
      ++visits;
    });
    CHECK(visits == std::max(std::abs(x1 - x0), std::abs(y1 - y0)) + 1);
    CHECK(cells.size() == static_cast<std::size_t>(visits));
    for (auto [x, y] : cells) {
      CHECK(segment_touches_cell(x0, y0, x1, y1, static_cast<int>(x), static_cast<int>(y)));
    }
  }
}

TEST_CASE("rasterize_points") {
  const TileSpec spec = small_tile(20, 20, {100, 200, 0});
  std::vector<SemanticPoint> pts;
  for (int i = 0; i < 3; ++i) {
    pts.push_back({{110.2 + 0.1 * i, 210.5, 0}, SemanticClass::kLaneMarking});
  }
  pts.push_back({{100, 200, 0}, SemanticClass::kRoadBoundary});
  pts.push_back({{120, 205, 0}, SemanticClass::kRoadBoundary});
  const RasterTile lanes = rasterize_points(pts, SemanticClass::kLaneMarking, spec);
  CHECK(lanes.at(10, 10) == 3.0);
  CHECK(lanes.channel == Channel::kLaneMarking);
  const RasterTile bounds = rasterize_points(pts, SemanticClass::kRoadBoundary, spec);
  CHECK(bounds.at(0, 0) == 1.0);
  double sum = 0;
  for (double v : bounds.values) sum += v;
  CHECK(sum == 1.0);
  const RasterTile none = rasterize_points({}, SemanticClass::kLaneMarking, spec);
  CHECK(std::all_of(none.values.begin(), none.values.end(), [](double v) { return v == 0; }));
}

TEST_CASE("normalize") {
  RasterTile t(small_tile(4, 1), Channel::kTraceDensity);
  t.values = {0, 9, 99, 3};
  const RasterTile n = normalize(t);
  CHECK(n.values[0] == 0.0);
  CHECK(n.values[1] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(n.values[2] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(n.channel == Channel::kTraceDensity);
  t.values[3] = -1;
  CHECK_THROWS_AS(normalize(t), InvalidInputError);

  std::vector<double> xs;
  for (int i = 0; i <= 100; ++i) xs.push_back(i * 0.37);
  RasterTile m(small_tile(static_cast<int>(xs.size()), 1), Channel::kTraceDensity);
  m.values = xs;
  const RasterTile nm = normalize(m);
  for (std::size_t i = 1; i < xs.size(); ++i) CHECK(nm.values[i] > nm.values[i - 1]);
}

TEST_CASE("merge weights") {
  const TileSpec spec = small_tile(100, 100);
  CHECK(merge_weight(spec, 49, 49) > 0.99);
  CHECK(merge_weight(spec, 0, 50) == doctest::Approx(0.505));
  for (int i = 0; i < 100; ++i) CHECK(merge_weight(spec, 0, i) == merge_weight(spec, i, 0));
}

TEST_CASE("merge_tiles") {
  RasterTile a(small_tile(10, 10), Channel::kProbability);
  for (std::size_t i = 0; i < a.values.size(); ++i) a.values[i] = (i % 7) / 7.0;
  const RasterTile single = merge_tiles({a});
  CHECK(single.values == a.values);
  CHECK(single.spec == a.spec);

  // Constant fields survive exactly on a 3x3 half-stepped grid.
  const TileGrid grid = plan_tiles({0, 0, 0}, {20, 20, 0}, small_tile(10, 10));
  std::vector<RasterTile> tiles;
  for (const TileSpec& s : grid.tiles) {
    RasterTile t(s, Channel::kProbability);
    std::fill(t.values.begin(), t.values.end(), 0.7);
    tiles.push_back(t);
  }
  const RasterTile flat = merge_tiles(tiles);
  for (double v : flat.values) CHECK(v == 0.7);

  // Weighted average of overlapping tiles, independent of order.
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  for (auto& t : tiles) {
    for (double& v : t.values) v = u(rng);
  }
  const RasterTile m = merge_tiles(tiles);
  std::vector<RasterTile> shuffled = tiles;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  CHECK(merge_tiles(shuffled).values == m.values);

  const int gx = 7, gy = 6;
  double sw = 0, swv = 0;
  for (const auto& t : tiles) {
    const int px = gx - static_cast<int>(t.spec.origin.x), py = gy - static_cast<int>(t.spec.origin.y);
    if (!t.spec.contains(px, py)) continue;
    const double w = merge_weight(t.spec, px, py);
    sw += w;
    swv += w * t.at(px, py);
  }
  CHECK(m.at(gx, gy) == doctest::Approx(swv / sw).epsilon(1e-12));

  CHECK_THROWS_AS(merge_tiles({}), InvalidInputError);
  RasterTile fine(small_tile(10, 10), Channel::kProbability);
  fine.spec.resolution = 0.2;
  CHECK_THROWS_AS(merge_tiles({a, fine}), InvalidInputError);
}

TEST_CASE("raster validation") {
  RasterTile p(small_tile(2, 2), Channel::kProbability);
  p.values[0] = 1.5;
  CHECK_THROWS_AS(p.validate(), InvalidInputError);
  TileSpec bad;
  bad.resolution = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidInputError);
  CHECK(small_tile(10, 10).pixel_of({9.999, 0, 0}).x == 9);
  CHECK(small_tile(10, 10).pixel_of({10.0, 0, 0}).x == 10);
}
