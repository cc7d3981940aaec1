#ifndef ROADINFER_CONFIG_H_
#define ROADINFER_CONFIG_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "roadinfer/extract.h"
#include "roadinfer/mapmatch.h"
#include "roadinfer/metrics.h"
#include "roadinfer/raster.h"
#include "roadinfer/refine.h"
#include "roadinfer/segment.h"

namespace roadinfer {

struct PipelineConfig {
  TileSpec tile;                  // origin is ignored; tiles are planned
  double tile_margin = 50.0;      // meters added around the data extent
  SegmenterConfig segmenter;
  LabelConfig label;
  CpLossConfig cp_loss;
  CleaningConfig cleaning;
  GapFillConfig gap_fill;
  DisambiguationConfig disambiguation;
  MatchConfig match;
  GeoConfig geo;
  ItopoConfig itopo;

  bool enable_gap_fill = true;
  bool enable_prune_gap = true;
  bool enable_disambiguation = true;

  std::string traces_path;
  std::string points_path;
  std::string ground_truth_path;  // optional; adds metrics to the manifest
  std::string output_dir = "out";
  std::uint64_t seed = 0;
  int workers = 0;  // 0 = available parallelism
  bool keep_intermediate = false;

  void validate() const;
};

// Applies one "dotted.key=value" setting. Throws InvalidInputError for
// unknown keys or unparsable values.
void set_config_value(PipelineConfig& config, const std::string& key,
                      const std::string& value);

// Parses a key=value file body; '#' starts a comment.
void apply_config_text(PipelineConfig& config, const std::string& text);

PipelineConfig load_config(const std::string& path);

// Every setting as key -> value text, in key order.
std::map<std::string, std::string> config_snapshot(const PipelineConfig& config);

std::vector<std::string> config_keys();

}  // namespace roadinfer

#endif  // ROADINFER_CONFIG_H_
