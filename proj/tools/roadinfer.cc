// Command-line front end: synthetic data, each pipeline stage on its own,
// evaluation, rendering and the full pipeline.

#include <spdlog/spdlog.h>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "roadinfer/config.h"
#include "roadinfer/error.h"
#include "roadinfer/extract.h"
#include "roadinfer/io.h"
#include "roadinfer/mapmatch.h"
#include "roadinfer/metrics.h"
#include "roadinfer/pipeline.h"
#include "roadinfer/refine.h"
#include "roadinfer/segment.h"
#include "roadinfer/synth.h"
#include "roadinfer/thinning.h"

namespace fs = std::filesystem;
using namespace roadinfer;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kInputError = 2, kInvariant = 3 };

void setup_logging() {
  const char* level = std::getenv("P2R_LOG");
  spdlog::set_level(level ? spdlog::level::from_str(level) : spdlog::level::warn);
  spdlog::set_default_logger(spdlog::default_logger());
}

std::string report_text(const std::string& name, const MetricReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "%s.precision=%.6f\n%s.recall=%.6f\n%s.f1=%.6f\n"
                "%s.matched_proposal=%zu\n%s.total_proposal=%zu\n"
                "%s.matched_gt=%zu\n%s.total_gt=%zu\n",
                name.c_str(), r.precision, name.c_str(), r.recall, name.c_str(), r.f1,
                name.c_str(), r.matched_proposal, name.c_str(), r.total_proposal,
                name.c_str(), r.matched_gt, name.c_str(), r.total_gt);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Road graph inference from fleet traces"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  int workers = 0;
  bool keep = false;
  std::string out;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key=value configuration file");
    sub->add_option("--set", overrides, "override one setting (key=value)");
    sub->add_option("--seed", seed, "random seed");
    sub->add_option("--workers", workers, "worker threads (0 = all cores)");
    sub->add_flag("--keep-intermediate", keep, "write every stage artifact");
    sub->add_option("--out", out, "output file or directory")->required();
  };

  auto* synth = app.add_subcommand("synth", "generate a synthetic scenario");
  std::string scenario = "grid", policy = "all_shortest_paths";
  int per_route = 10;
  NoiseModel noise;
  ScenarioSpec scenario_spec;
  synth->add_option("--scenario", scenario, "straight|grid|overpass|intersection|tee");
  synth->add_option("--policy", policy,
                    "all_shortest_paths|per_edge_shuttle|straight_through_only");
  synth->add_option("--traces-per-route", per_route);
  synth->add_option("--white-sigma", noise.white_sigma);
  synth->add_option("--bias-sigma", noise.bias_sigma);
  synth->add_option("--point-spacing", noise.point_spacing);
  synth->add_option("--dropout", noise.dropout_prob);
  synth->add_option("--extent", scenario_spec.extent);
  common(synth);

  std::string traces_path, points_path, graph_path, mask_path, gt_path;
  std::string proposal_path, overlay_path, backdrop_path, pred_mask_path, gt_mask_path;

  auto* rasterize = app.add_subcommand("rasterize", "rasterize traces and points into tiles");
  rasterize->add_option("--traces", traces_path)->required();
  rasterize->add_option("--points", points_path);
  common(rasterize);

  auto* segment = app.add_subcommand("segment", "segment rasterized tiles into one mask");
  std::string tiles_dir;
  segment->add_option("--tiles", tiles_dir, "directory written by rasterize")->required();
  common(segment);

  auto* extract = app.add_subcommand("extract", "skeletonize a mask and vectorize it");
  extract->add_option("--mask", mask_path)->required();
  common(extract);

  auto* refine = app.add_subcommand("refine", "gap filling, pruning, disambiguation");
  refine->add_option("--graph", graph_path)->required();
  refine->add_option("--traces", traces_path)->required();
  common(refine);

  auto* match = app.add_subcommand("match", "map-match traces onto a graph");
  match->add_option("--graph", graph_path)->required();
  match->add_option("--traces", traces_path)->required();
  bool uniform = false;
  match->add_flag("--uniform", uniform, "equal weights for gap and segmentation edges");
  common(match);

  auto* eval = app.add_subcommand("eval", "GEO / iTOPO / soft F1 scores");
  eval->add_option("--proposal", proposal_path);
  eval->add_option("--gt", gt_path);
  eval->add_option("--pred-mask", pred_mask_path);
  eval->add_option("--gt-mask", gt_mask_path);
  common(eval);

  auto* render = app.add_subcommand("render", "draw a graph as SVG");
  render->add_option("--graph", graph_path)->required();
  render->add_option("--overlay", overlay_path);
  render->add_option("--backdrop", backdrop_path);
  common(render);

  auto* pipeline = app.add_subcommand("pipeline", "run every stage end to end");
  pipeline->add_option("--traces", traces_path);
  pipeline->add_option("--points", points_path);
  pipeline->add_option("--gt", gt_path, "ground truth for metrics in the manifest");
  common(pipeline);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    PipelineConfig config;
    if (!config_path.empty()) config = load_config(config_path);
    for (const std::string& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw InvalidInputError("--set expects key=value");
      set_config_value(config, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (app.got_subcommand(synth) || seed != 0) config.seed = seed;
    if (workers > 0) config.workers = workers;
    if (keep) config.keep_intermediate = true;
    config.validate();

    if (app.got_subcommand(synth)) {
      scenario_spec.name = scenario_from_string(scenario);
      const SyntheticFleet fleet = make_synthetic_fleet(
          scenario_spec, per_route, noise, route_policy_from_string(policy), config.seed);
      fs::create_directories(out);
      write_graph((fs::path(out) / "ground_truth.geojson").string(), fleet.ground_truth);
      write_traces((fs::path(out) / "traces.geojson").string(), fleet.dataset.traces,
                   fleet.dataset.frame, &fleet.oracle);
      write_points((fs::path(out) / "points.geojson").string(), fleet.dataset.points,
                   fleet.dataset.frame);
    } else if (app.got_subcommand(rasterize)) {
      FleetDataset data;
      data.traces = read_traces(traces_path, &data.frame);
      if (!points_path.empty()) data.points = read_points(points_path);
      if (data.traces.empty()) throw InvalidInputError("no traces in " + traces_path);
      fs::create_directories(out);
      const auto [lo, hi] = [&] {
        LocalPoint a = data.traces.front().points.front(), b = a;
        for (const auto& t : data.traces) {
          for (const auto& p : t.points) {
            a.x = std::min(a.x, p.x), a.y = std::min(a.y, p.y);
            b.x = std::max(b.x, p.x), b.y = std::max(b.y, p.y);
          }
        }
        a.x -= config.tile_margin, a.y -= config.tile_margin;
        b.x += config.tile_margin, b.y += config.tile_margin;
        return std::make_pair(a, b);
      }();
      const TileGrid grid = plan_tiles(lo, hi, config.tile);
      for (std::size_t i = 0; i < grid.tiles.size(); ++i) {
        const std::string stem = (fs::path(out) / ("tile_" + std::to_string(grid.indices[i].x) +
                                                   "_" + std::to_string(grid.indices[i].y) + "_"))
                                     .string();
        write_raster(stem + "traces.p2rr", rasterize_traces(data.traces, grid.tiles[i]));
        write_raster(stem + "lanes.p2rr", rasterize_points(data.points,
                                                           SemanticClass::kLaneMarking,
                                                           grid.tiles[i]));
        write_raster(stem + "boundaries.p2rr",
                     rasterize_points(data.points, SemanticClass::kRoadBoundary,
                                      grid.tiles[i]));
      }
    } else if (app.got_subcommand(segment)) {
      std::vector<RasterTile> masks;
      for (const auto& entry : fs::directory_iterator(tiles_dir)) {
        const std::string name = entry.path().filename().string();
        const std::string suffix = "_traces.p2rr";
        if (name.size() <= suffix.size() ||
            name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0) {
          continue;
        }
        const std::string stem = entry.path().string().substr(
            0, entry.path().string().size() - suffix.size() + 1);
        TileIndex index;
        if (std::sscanf(name.c_str(), "tile_%d_%d_", &index.x, &index.y) != 2) {
          throw FormatError("unexpected tile file name " + name);
        }
        // Tiles hold raw counts; the segmenter expects log-normalized input.
        masks.push_back(segment_tile(config.segmenter,
                                     normalize(read_raster(stem + "traces.p2rr")),
                                     normalize(read_raster(stem + "lanes.p2rr")),
                                     normalize(read_raster(stem + "boundaries.p2rr")), index));
      }
      if (masks.empty()) throw InvalidInputError("no tiles found in " + tiles_dir);
      write_raster(out, merge_tiles(masks));
    } else if (app.got_subcommand(extract)) {
      const RasterTile mask = read_raster(mask_path);
      const SkeletonMask skel{
          mask.spec,
          skeletonize_guo_hall(to_binary_grid(mask, config.segmenter.binarize_threshold))};
      write_graph(out, clean_graph(vectorize(skel), config.cleaning));
    } else if (app.got_subcommand(refine)) {
      const RoadGraph g = read_graph(graph_path);
      const auto traces = read_traces(traces_path);
      RoadGraph r = g;
      if (config.enable_gap_fill) {
        r = fill_gaps(r, config.gap_fill);
        if (config.enable_prune_gap) {
          r = prune_gap_edges(r, traces, config.match, config.disambiguation,
                              config.cleaning, config.workers);
        }
      }
      if (config.enable_disambiguation) {
        r = disambiguate_intersections(r, traces, config.match, config.disambiguation,
                                       config.workers);
      }
      write_graph(out, clean_graph(r, config.cleaning));
    } else if (app.got_subcommand(match)) {
      const RoadGraph g = read_graph(graph_path);
      const auto traces = read_traces(traces_path);
      const MapMatcher matcher(g, uniform ? config.match.uniform() : config.match);
      write_matches(out, matcher.match_all(traces, config.workers));
    } else if (app.got_subcommand(eval)) {
      std::string text;
      if (!proposal_path.empty() || !gt_path.empty()) {
        if (proposal_path.empty() || gt_path.empty()) {
          throw InvalidInputError("eval needs both --proposal and --gt");
        }
        const RoadGraph p = read_graph(proposal_path);
        const RoadGraph g = read_graph(gt_path);
        text += report_text("geo", geo_metric(p, g, config.geo));
        text += report_text("itopo", itopo_metric(p, g, config.itopo));
      }
      if (!pred_mask_path.empty() || !gt_mask_path.empty()) {
        if (pred_mask_path.empty() || gt_mask_path.empty()) {
          throw InvalidInputError("eval needs both --pred-mask and --gt-mask");
        }
        text += report_text("soft_f1", soft_f1(read_raster(pred_mask_path),
                                               read_raster(gt_mask_path)));
      }
      if (text.empty()) throw InvalidInputError("nothing to evaluate");
      write_file(out, text);
      std::cout << text;
    } else if (app.got_subcommand(render)) {
      const RoadGraph g = read_graph(graph_path);
      std::optional<RoadGraph> overlay;
      std::optional<RasterTile> backdrop;
      SvgOptions options;
      if (!overlay_path.empty()) options.overlay = &overlay.emplace(read_graph(overlay_path));
      if (!backdrop_path.empty()) {
        options.backdrop = &backdrop.emplace(read_raster(backdrop_path));
      }
      write_svg(out, g, options);
    } else if (app.got_subcommand(pipeline)) {
      if (!traces_path.empty()) config.traces_path = traces_path;
      if (!points_path.empty()) config.points_path = points_path;
      if (!gt_path.empty()) config.ground_truth_path = gt_path;
      config.output_dir = out;
      const RunManifest m = run_pipeline(config);
      for (const auto& [k, v] : m.metrics) std::cout << k << "=" << v << "\n";
      std::cout << "graph.sha256=" << m.outputs.at("graph.geojson") << "\n";
    }
  } catch (const InvariantError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInvariant;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kOk;
}
