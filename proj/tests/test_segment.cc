#include <algorithm>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "oracles.h"
#include "roadinfer/error.h"
#include "roadinfer/extract.h"
#include "roadinfer/io.h"
#include "roadinfer/segment.h"
#include "roadinfer/synth.h"

using namespace roadinfer;

namespace {

TileSpec tile(int w, int h, LocalPoint origin = {}) {
  TileSpec s;
  s.origin = origin;
  s.width_px = w;
  s.height_px = h;
  return s;
}

bool all_zero(const RasterTile& t) {
  return std::all_of(t.values.begin(), t.values.end(), [](double v) { return v == 0.0; });
}

bool subset(const RasterTile& a, const RasterTile& b) {
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    if (a.values[i] > b.values[i]) return false;
  }
  return true;
}

// Horizontal bar of `rows` rows starting at y0, as a probability tile.
RasterTile bar(const TileSpec& spec, int y0, int rows, double on, double off) {
  RasterTile t(spec, Channel::kProbability);
  for (int y = 0; y < spec.height_px; ++y) {
    for (int x = 0; x < spec.width_px; ++x) {
      t.at(x, y) = y >= y0 && y < y0 + rows && x >= 8 && x < spec.width_px - 8 ? on : off;
    }
  }
  return t;
}

}  // namespace

TEST_CASE("kde segmentation") {
  const TileSpec spec = tile(40, 30);
  const RasterTile zero(spec, Channel::kTraceDensity);
  const RasterTile lanes(spec, Channel::kLaneMarking), bounds(spec, Channel::kRoadBoundary);
  CHECK(all_zero(segment_tile(SegmenterConfig{}, zero, lanes, bounds)));

  // Twenty noisy traces along one road give a single band over it.
  ScenarioSpec sc;
  sc.name = Scenario::kStraight;
  sc.extent = 200;
  const RoadGraph gt = make_ground_truth(sc);
  const TraceSample s = sample_traces(gt, 10, NoiseModel{}, RoutePolicy::kAllShortestPaths, 0);
  REQUIRE(s.traces.size() == 20);
  const TileSpec road_tile = tile(240, 60, {-20, -30, 0});
  const RasterTile density = normalize(rasterize_traces(s.traces, road_tile));
  const RasterTile l(road_tile, Channel::kLaneMarking), b(road_tile, Channel::kRoadBoundary);
  const RasterTile mask = segment_tile(SegmenterConfig{}, density, l, b);
  const BinaryGrid fg = to_binary_grid(mask);
  CHECK(count_components_8(fg) == 1);
  const Pixel road_row = road_tile.pixel_of({0, 0, 0});
  for (int x = road_tile.pixel_of({0, 0, 0}).x; x <= road_tile.pixel_of({199, 0, 0}).x; ++x) {
    int lo = road_tile.height_px, hi = -1;
    for (int y = 0; y < road_tile.height_px; ++y) {
      if (fg.get(x, y)) lo = std::min(lo, y), hi = std::max(hi, y);
    }
    REQUIRE(hi >= lo);
    CHECK(std::abs((lo + hi) / 2.0 - road_row.y) <= 2.0);
  }

  // A noiseless bundle is one pixel wide: log10(21) blurred with sigma 3 peaks
  // near 0.175, so it needs a lower threshold. The blur halves it at the ends.
  NoiseModel silent;
  silent.white_sigma = silent.bias_sigma = 0;
  const TraceSample exact = sample_traces(gt, 10, silent, RoutePolicy::kAllShortestPaths, 0);
  SegmenterConfig low;
  low.kde_threshold = 0.1;
  const BinaryGrid thin =
      to_binary_grid(segment_tile(low, normalize(rasterize_traces(exact.traces, road_tile)), l, b));
  CHECK(count_components_8(thin) == 1);
  for (int x = road_tile.pixel_of({10, 0, 0}).x; x <= road_tile.pixel_of({189, 0, 0}).x; ++x) {
    CHECK(thin.get(x, static_cast<int>(road_row.y)));
  }

  // The vision channels do not influence this backend.
  RasterTile noisy_lanes = l;
  std::mt19937_64 rng(5);
  for (double& v : noisy_lanes.values) v = static_cast<double>(rng() % 5);
  CHECK(segment_tile(SegmenterConfig{}, density, noisy_lanes, b).values == mask.values);

  CHECK_THROWS_AS(segment_tile(SegmenterConfig{}, density, lanes, bounds), InvalidInputError);
  SegmenterConfig bad;
  bad.kde_sigma_px = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidInputError);
}

TEST_CASE("gaussian blur keeps mass away from borders") {
  RasterTile t(tile(41, 41), Channel::kTraceDensity);
  t.at(20, 20) = 5.0;
  const RasterTile b = gaussian_blur(t, 2.0);
  double sum = 0;
  for (double v : b.values) sum += v;
  CHECK(sum == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(b.at(20, 20) > b.at(21, 20));
  CHECK(b.at(19, 20) == doctest::Approx(b.at(21, 20)).epsilon(1e-15));
}

TEST_CASE("external masks") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "roadinfer_segment_test";
  fs::create_directories(dir);
  const TileSpec spec = tile(16, 16);
  RasterTile m(spec, Channel::kProbability);
  m.at(3, 4) = 0.75;
  write_raster((dir / "mask_2_1.p2rr").string(), m);
  RasterTile other(tile(8, 8), Channel::kProbability);
  write_raster((dir / "mask_0_0.p2rr").string(), other);

  SegmenterConfig cfg;
  cfg.backend = SegmenterBackend::kExternalMask;
  cfg.external_mask_path_template = (dir / "mask_{tile_x}_{tile_y}.p2rr").string();
  CHECK(external_mask_path(cfg.external_mask_path_template, {2, 1}) ==
        (dir / "mask_2_1.p2rr").string());
  const RasterTile d(spec, Channel::kTraceDensity), l(spec, Channel::kLaneMarking),
      b(spec, Channel::kRoadBoundary);
  const RasterTile got = segment_tile(cfg, d, l, b, {2, 1});
  CHECK(got.at(3, 4) == 0.75);
  CHECK(got.channel == Channel::kProbability);
  CHECK_THROWS_AS(segment_tile(cfg, d, l, b, {0, 0}), InvalidInputError);
  CHECK_THROWS_AS(segment_tile(cfg, d, l, b, {5, 5}), IoError);
  fs::remove_all(dir);
  CHECK(segmenter_backend_from_string("ExternalMask") == SegmenterBackend::kExternalMask);
}

TEST_CASE("make_labels") {
  RoadGraph gt;
  const EdgeId busy = oracle::add_road(gt, {10, 10, 0}, {90, 10, 0}, Provenance::kGroundTruth);
  const EdgeId quiet = oracle::add_road(gt, {10, 60, 0}, {90, 60, 0}, Provenance::kGroundTruth);
  const TileSpec spec = tile(100, 80);
  NoiseModel noise;
  noise.white_sigma = 0.5;
  noise.bias_sigma = 0.5;
  const TraceSample s = sample_edge_traces(gt, {{busy, 5}, {quiet, 3}}, noise, 1);
  const MapMatcher matcher(gt, MatchConfig{}.uniform());
  LabelConfig cfg;
  const RasterTile label = make_labels(gt, s.traces, matcher, spec, cfg);
  CHECK(label.values == rasterize_edges(gt, {busy}, spec).values);
  CHECK(label.channel == Channel::kLabel);
  CHECK(all_zero(make_labels(gt, {}, matcher, spec, cfg)));

  const RasterTile all = rasterize_edges(gt, {busy, quiet}, spec);
  RasterTile prev = all;
  for (int n = 1; n <= 6; ++n) {
    cfg.min_trace_support = n;
    const RasterTile cur = make_labels(gt, s.traces, matcher, spec, cfg);
    CHECK(subset(cur, all));
    CHECK(subset(cur, prev));
    prev = cur;
  }
  CHECK(all_zero(prev));

  cfg.min_trace_support = 1;
  cfg.centerline_thickness_px = 3;
  const RasterTile thick = make_labels(gt, s.traces, matcher, spec, cfg);
  CHECK(thick.at(50, 11) == 1.0);
  CHECK(thick.at(50, 9) == 1.0);
  cfg.min_trace_support = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidInputError);
}

TEST_CASE("binarize") {
  RasterTile p(tile(3, 1), Channel::kProbability);
  p.values = {0.0, 0.5, 0.49};
  CHECK(binarize(p, 0.5).values == std::vector<double>{0, 1, 0});
  CHECK(binarize(p, 0.0).values == std::vector<double>{1, 1, 1});
  CHECK(all_zero(binarize(RasterTile(tile(3, 3), Channel::kProbability), 0.5)));
  CHECK_THROWS_AS(binarize(p, 1.5), InvalidInputError);
}

TEST_CASE("cp_loss examples") {
  const TileSpec spec = tile(64, 64);
  const CpLossConfig cfg;
  RasterTile label = bar(spec, 30, 3, 1.0, 0.0);
  label.channel = Channel::kLabel;

  const RasterTile exact = bar(spec, 30, 3, 1.0 - cfg.epsilon, cfg.epsilon);
  const CpLoss e = cp_loss(exact, label, cfg);
  CHECK(e.connectivity_penalty == 0.0);
  CHECK(e.bce < 1e-5);
  CHECK(e.dice < 1e-5);
  CHECK(e.total == e.bce + e.dice);

  const CpLoss soft = cp_loss(bar(spec, 30, 3, 0.9, 0.1), label, cfg);
  CHECK(soft.connectivity_penalty == 0.0);
  CHECK(soft.total == soft.bce + soft.dice);
  CHECK(soft.total > 0.0);

  const RasterTile shifted = bar(spec, 35, 3, 0.9, 0.1);
  const CpLoss s = cp_loss(shifted, label, cfg);
  CHECK(!skeleton_mismatch(to_binary_grid(shifted), to_binary_grid(label)).empty());
  CHECK(s.total > s.bce + s.dice);
  const CpLoss want = oracle::naive_cp_loss(shifted, label, cfg);
  CHECK(std::abs(s.total - want.total) < 1e-9);
  CHECK(std::abs(s.bce - want.bce) < 1e-9);
  CHECK(std::abs(s.dice - want.dice) < 1e-9);
  CHECK(std::abs(s.connectivity_penalty - want.connectivity_penalty) < 1e-9);

  CHECK_THROWS_AS(cp_loss(shifted, RasterTile(tile(32, 32), Channel::kLabel), cfg),
                  InvalidInputError);
}

TEST_CASE("skeleton mismatch is symmetric") {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 20; ++i) {
    const BinaryGrid a = oracle::random_blobs(rng, 40, 40, 3);
    const BinaryGrid b = oracle::random_blobs(rng, 40, 40, 3);
    CHECK(skeleton_mismatch(a, b) == skeleton_mismatch(b, a));
    CHECK(skeleton_mismatch(a, a).empty());
  }
}
