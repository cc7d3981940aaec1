#include "roadinfer/pipeline.h"

#include <spdlog/spdlog.h>

#include <chrono>
#include <filesystem>

#include "json.hpp"
#include "roadinfer/error.h"
#include "roadinfer/extract.h"
#include "roadinfer/io.h"
#include "roadinfer/metrics.h"
#include "roadinfer/parallel.h"
#include "roadinfer/refine.h"
#include "roadinfer/segment.h"
#include "roadinfer/thinning.h"

namespace roadinfer {
namespace {

// Re-throws library errors with the stage name prepended, keeping the type.
template <typename Fn>
auto in_stage(const std::string& name, Fn&& fn) {
  auto tag = [&](const std::exception& e) { return "stage " + name + ": " + e.what(); };
  try {
    return fn();
  } catch (const InvalidInputError& e) {
    throw InvalidInputError(tag(e));
  } catch (const NotFoundError& e) {
    throw NotFoundError(tag(e));
  } catch (const IoError& e) {
    throw IoError(tag(e));
  } catch (const FormatError& e) {
    throw FormatError(tag(e));
  } catch (const InvariantError& e) {
    throw InvariantError(tag(e));
  }
}

class Stages {
 public:
  explicit Stages(RunManifest& manifest) : manifest_(manifest) {}

  template <typename Fn>
  auto run(const std::string& name, Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    auto finish = [&] {
      const double s = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - start)
                           .count();
      manifest_.stages.push_back({name, s});
      spdlog::debug("stage {} took {:.3f} s", name, s);
    };
    if constexpr (std::is_void_v<decltype(fn())>) {
      in_stage(name, fn);
      finish();
    } else {
      auto out = in_stage(name, fn);
      finish();
      return out;
    }
  }

 private:
  RunManifest& manifest_;
};

std::pair<LocalPoint, LocalPoint> data_bounds(const FleetDataset& data) {
  bool have = false;
  LocalPoint lo, hi;
  auto grow = [&](const LocalPoint& p) {
    if (!have) {
      lo = hi = p;
      have = true;
      return;
    }
    lo.x = std::min(lo.x, p.x), lo.y = std::min(lo.y, p.y);
    hi.x = std::max(hi.x, p.x), hi.y = std::max(hi.y, p.y);
  };
  for (const auto& t : data.traces) {
    for (const auto& p : t.points) grow(p);
  }
  for (const auto& p : data.points) grow(p.position);
  if (!have) throw InvalidInputError("no trace points");
  return {lo, hi};
}

}  // namespace

std::string RunManifest::to_json() const {
  nlohmann::json stages_json = nlohmann::json::array();
  for (const auto& s : stages) {
    stages_json.push_back({{"stage", s.name}, {"seconds", s.seconds}});
  }
  nlohmann::json doc = {{"config", config},
                        {"inputs", inputs},
                        {"stages", stages_json},
                        {"outputs", outputs},
                        {"metrics", metrics}};
  return doc.dump(2) + "\n";
}

PipelineResult infer_road_graph(const FleetDataset& data, const PipelineConfig& config,
                                const RoadGraph* ground_truth, bool write_outputs) {
  config.validate();
  PipelineResult result;
  RunManifest& manifest = result.manifest;
  manifest.config = config_snapshot(config);
  Stages stages(manifest);
  const int workers = config.workers;

  namespace fs = std::filesystem;
  const bool writing = write_outputs && !config.output_dir.empty();
  const bool keep = writing && config.keep_intermediate;
  const fs::path out_dir(config.output_dir);
  if (writing) fs::create_directories(out_dir);
  auto emit = [&](const std::string& name, const std::string& bytes, bool write) {
    manifest.outputs[name] = sha256_hex(bytes);
    if (write) write_file((out_dir / name).string(), bytes);
  };

  manifest.inputs["traces"] = sha256_hex(traces_to_geojson(data.traces, data.frame));
  if (data.traces.empty()) {
    throw InvalidInputError("stage ingest: no traces");
  }

  const TileGrid grid = stages.run("plan", [&] {
    auto [lo, hi] = data_bounds(data);
    lo.x -= config.tile_margin, lo.y -= config.tile_margin;
    hi.x += config.tile_margin, hi.y += config.tile_margin;
    return plan_tiles(lo, hi, config.tile);
  });
  const std::size_t n_tiles = grid.tiles.size();

  struct TileInputs {
    RasterTile traces, lanes, bounds;
  };
  std::vector<TileInputs> inputs(n_tiles);
  stages.run("rasterize", [&] {
    parallel_for(n_tiles, workers, [&](std::size_t i) {
      const TileSpec& spec = grid.tiles[i];
      inputs[i] = {normalize(rasterize_traces(data.traces, spec)),
                   normalize(rasterize_points(data.points, SemanticClass::kLaneMarking, spec)),
                   normalize(rasterize_points(data.points, SemanticClass::kRoadBoundary, spec))};
    });
  });
  if (keep) {
    for (std::size_t i = 0; i < n_tiles; ++i) {
      const std::string stem = "tile_" + std::to_string(grid.indices[i].x) + "_" +
                               std::to_string(grid.indices[i].y) + "_";
      emit(stem + "traces.p2rr", raster_to_bytes(inputs[i].traces), true);
      emit(stem + "lanes.p2rr", raster_to_bytes(inputs[i].lanes), true);
      emit(stem + "boundaries.p2rr", raster_to_bytes(inputs[i].bounds), true);
    }
  }

  std::vector<RasterTile> masks(n_tiles);
  stages.run("segment", [&] {
    parallel_for(n_tiles, workers, [&](std::size_t i) {
      masks[i] = segment_tile(config.segmenter, inputs[i].traces, inputs[i].lanes,
                              inputs[i].bounds, grid.indices[i]);
    });
  });
  inputs.clear();

  result.probability = stages.run("merge", [&] { return merge_tiles(masks); });
  masks.clear();
  if (keep) {
    emit("probability.p2rr", raster_to_bytes(result.probability), true);
    emit("probability.pgm", raster_to_pgm(result.probability), true);
  }

  const SkeletonMask skeleton = stages.run("skeletonize", [&] {
    return SkeletonMask{result.probability.spec,
                        skeletonize_guo_hall(to_binary_grid(
                            result.probability, config.segmenter.binarize_threshold))};
  });
  if (keep) {
    RasterTile skel(skeleton.spec, Channel::kLabel);
    for (std::size_t i = 0; i < skel.values.size(); ++i) {
      skel.values[i] = skeleton.grid.cells()[i];
    }
    emit("skeleton.pgm", raster_to_pgm(skel), true);
  }

  RoadGraph g = stages.run("vectorize", [&] {
    RoadGraph v = vectorize(skeleton);
    v.set_frame(data.frame);
    return v;
  });
  if (keep) emit("graph_vectorized.geojson", graph_to_geojson(g), true);

  g = stages.run("clean", [&] { return clean_graph(g, config.cleaning); });
  if (keep) emit("graph_clean.geojson", graph_to_geojson(g), true);

  if (config.enable_gap_fill) {
    g = stages.run("gap-fill", [&] { return fill_gaps(g, config.gap_fill); });
    if (keep) emit("graph_gapfill.geojson", graph_to_geojson(g), true);
  }
  if (config.enable_gap_fill && config.enable_prune_gap) {
    g = stages.run("prune-gap", [&] {
      return prune_gap_edges(g, data.traces, config.match, config.disambiguation,
                             config.cleaning, workers);
    });
    if (keep) emit("graph_pruned.geojson", graph_to_geojson(g), true);
  }
  if (config.enable_disambiguation) {
    g = stages.run("disambiguate", [&] {
      return disambiguate_intersections(g, data.traces, config.match,
                                        config.disambiguation, workers);
    });
    if (keep) emit("graph_disambiguated.geojson", graph_to_geojson(g), true);
  }
  g = stages.run("final-clean", [&] {
    RoadGraph out = clean_graph(g, config.cleaning);
    out.drop_isolated_nodes();
    out.validate();
    return out;
  });

  if (ground_truth) {
    stages.run("eval", [&] {
      const MetricReport geo = geo_metric(g, *ground_truth, config.geo);
      const MetricReport topo = itopo_metric(g, *ground_truth, config.itopo);
      manifest.metrics = {{"geo_precision", geo.precision},
                          {"geo_recall", geo.recall},
                          {"geo_f1", geo.f1},
                          {"itopo_precision", topo.precision},
                          {"itopo_recall", topo.recall},
                          {"itopo_f1", topo.f1}};
    });
  }

  stages.run("write", [&] {
    emit("graph.geojson", graph_to_geojson(g), writing);
    if (writing) {
      write_file((out_dir / "manifest.json").string(), manifest.to_json());
    }
  });
  result.graph = std::move(g);
  return result;
}

RunManifest run_pipeline(const PipelineConfig& config) {
  config.validate();
  FleetDataset data;
  std::map<std::string, std::string> digests;
  std::optional<RoadGraph> gt;
  in_stage("ingest", [&] {
    if (config.traces_path.empty()) throw InvalidInputError("no traces file given");
    data.traces = read_traces(config.traces_path, &data.frame);
    digests["traces_file"] = sha256_hex(read_file(config.traces_path));
    if (!config.points_path.empty()) {
      data.points = read_points(config.points_path);
      digests["points_file"] = sha256_hex(read_file(config.points_path));
    }
    if (!config.ground_truth_path.empty()) {
      gt = read_graph(config.ground_truth_path);
      digests["ground_truth_file"] = sha256_hex(read_file(config.ground_truth_path));
    }
  });
  PipelineResult r = infer_road_graph(data, config, gt ? &*gt : nullptr, true);
  r.manifest.inputs.insert(digests.begin(), digests.end());
  write_file((std::filesystem::path(config.output_dir) / "manifest.json").string(),
             r.manifest.to_json());
  return r.manifest;
}

}  // namespace roadinfer
