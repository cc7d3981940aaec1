// Coarse grid search of the kernel-density threshold on the synthetic grid
// scenario. Prints GEO and iTOPO F1 per candidate and the best value.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <vector>

#include "roadinfer/config.h"
#include "roadinfer/metrics.h"
#include "roadinfer/pipeline.h"
#include "roadinfer/synth.h"

using namespace roadinfer;

int main(int argc, char** argv) {
  std::vector<double> thresholds = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  if (argc > 1) {
    thresholds.clear();
    for (int i = 1; i < argc; ++i) thresholds.push_back(std::atof(argv[i]));
  }
  ScenarioSpec spec;
  spec.name = Scenario::kGrid;
  const NoiseModel noise;
  const SyntheticFleet fleet =
      make_synthetic_fleet(spec, 10, noise, RoutePolicy::kAllShortestPaths, 0);

  std::vector<std::pair<const char*, SyntheticFleet>> others;
  spec.name = Scenario::kOverpass;
  others.emplace_back("overpass", make_synthetic_fleet(spec, 10, noise,
                                                       RoutePolicy::kStraightThroughOnly, 0));
  spec.name = Scenario::kIntersection;
  others.emplace_back("intersection", make_synthetic_fleet(spec, 10, noise,
                                                           RoutePolicy::kAllShortestPaths, 0));

  double best_t = thresholds.front(), best_f1 = -1.0;
  for (double t : thresholds) {
    PipelineConfig config;
    config.workers = 1;
    config.segmenter.kde_threshold = t;
    const auto start = std::chrono::steady_clock::now();
    const PipelineResult r = infer_road_graph(fleet.dataset, config, &fleet.ground_truth);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const double geo = r.manifest.metrics.at("geo_f1");
    const double topo = r.manifest.metrics.at("itopo_f1");
    std::printf("threshold=%.2f geo_f1=%.4f itopo_f1=%.4f nodes=%zu edges=%zu %.1fs", t,
                geo, topo, r.graph.node_count(), r.graph.edge_count(), secs);
    // Sparser scenarios, for information only.
    for (const auto& [name, sparse] : others) {
      const PipelineResult o = infer_road_graph(sparse.dataset, config, &sparse.ground_truth);
      std::printf("  %s geo_f1=%.4f", name, o.manifest.metrics.at("geo_f1"));
    }
    std::printf("\n");
    if (geo > best_f1) best_f1 = geo, best_t = t;
  }
  std::printf("best threshold=%.2f geo_f1=%.4f\n", best_t, best_f1);
  return 0;
}
