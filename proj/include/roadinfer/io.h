#ifndef ROADINFER_IO_H_
#define ROADINFER_IO_H_

#include <string>
#include <vector>

#include "roadinfer/core.h"
#include "roadinfer/mapmatch.h"
#include "roadinfer/raster.h"
#include "roadinfer/synth.h"

namespace roadinfer {

// Graphs are GeoJSON FeatureCollections in local metric coordinates, with
// the frame origin in a top-level "local_frame" member. Nodes are Point
// features {node_id, z}; edges are LineString features
// {edge_id, node_a, node_b, provenance}.
std::string graph_to_geojson(const RoadGraph& graph);
RoadGraph graph_from_geojson(const std::string& text);
void write_graph(const std::string& path, const RoadGraph& graph);
RoadGraph read_graph(const std::string& path);

// One LineString feature per trace. The oracle, when given, goes to
// `<path>.oracle` as "trace_id point_index edge_id" lines.
std::string traces_to_geojson(const std::vector<GnssTrace>& traces,
                              const LocalFrame& frame);
void write_traces(const std::string& path, const std::vector<GnssTrace>& traces,
                  const LocalFrame& frame, const TraceOracle* oracle = nullptr);
// Reads `<path>.oracle` into `oracle` when both exist.
std::vector<GnssTrace> read_traces(const std::string& path,
                                   LocalFrame* frame = nullptr,
                                   TraceOracle* oracle = nullptr);

// Semantic points as one MultiPoint feature per class.
void write_points(const std::string& path, const std::vector<SemanticPoint>& points,
                  const LocalFrame& frame);
std::vector<SemanticPoint> read_points(const std::string& path);

// Little-endian binary raster: "P2RR", u16 version, u8 channel, u32 width,
// u32 height, f64 origin x/y, f64 resolution, then f32 values row by row.
std::string raster_to_bytes(const RasterTile& tile);
RasterTile raster_from_bytes(const std::string& bytes);
void write_raster(const std::string& path, const RasterTile& tile);
RasterTile read_raster(const std::string& path);

// 16-bit binary PGM of a Probability or Label raster, north row first.
std::string raster_to_pgm(const RasterTile& tile);
void write_pgm(const std::string& path, const RasterTile& tile);

// One JSON object per line: {"trace_id", "assignments", "arc_offsets"}.
void write_matches(const std::string& path, const std::vector<MatchResult>& matches);
std::vector<MatchResult> read_matches(const std::string& path);

struct SvgOptions {
  const RoadGraph* overlay = nullptr;    // drawn underneath in gray
  const RasterTile* backdrop = nullptr;  // downsampled to at most 200 cells a side
  double width_px = 800.0;
};

std::string render_svg(const RoadGraph& graph, const SvgOptions& options = {});
void write_svg(const std::string& path, const RoadGraph& graph,
               const SvgOptions& options = {});

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

// Lower-case hex SHA-256.
std::string sha256_hex(const std::string& bytes);

}  // namespace roadinfer

#endif  // ROADINFER_IO_H_
