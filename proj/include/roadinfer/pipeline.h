#ifndef ROADINFER_PIPELINE_H_
#define ROADINFER_PIPELINE_H_

#include <map>
#include <string>
#include <vector>

#include "roadinfer/config.h"
#include "roadinfer/core.h"
#include "roadinfer/raster.h"

namespace roadinfer {

struct StageTiming {
  std::string name;
  double seconds = 0.0;
};

struct RunManifest {
  std::map<std::string, std::string> config;
  std::map<std::string, std::string> inputs;   // name -> SHA-256
  std::vector<StageTiming> stages;
  std::map<std::string, std::string> outputs;  // name -> SHA-256
  std::map<std::string, double> metrics;       // when ground truth is known

  std::string to_json() const;
};

struct PipelineResult {
  RoadGraph graph;
  RasterTile probability;  // merged mosaic
  RunManifest manifest;
};

// Runs every stage on in-memory data. With config.output_dir non-empty and
// `write_outputs` set, the final graph and manifest (and, with
// keep_intermediate, every stage artifact) are written there.
PipelineResult infer_road_graph(const FleetDataset& data, const PipelineConfig& config,
                                const RoadGraph* ground_truth = nullptr,
                                bool write_outputs = false);

// Reads the inputs named in `config`, runs the pipeline and writes its
// outputs. Errors carry the name of the failing stage.
RunManifest run_pipeline(const PipelineConfig& config);

}  // namespace roadinfer

#endif  // ROADINFER_PIPELINE_H_
