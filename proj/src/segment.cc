#include "roadinfer/segment.h"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "roadinfer/error.h"
#include "roadinfer/extract.h"
#include "roadinfer/io.h"
#include "roadinfer/thinning.h"

namespace roadinfer {
namespace {

void require_same_grid(const RasterTile& a, const RasterTile& b) {
  if (!(a.spec == b.spec) || a.values.size() != b.values.size()) {
    throw InvalidInputError("rasters are not co-registered");
  }
}

void replace_all(std::string& s, std::string_view from, const std::string& to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

}  // namespace

std::string_view to_string(SegmenterBackend b) {
  return b == SegmenterBackend::kExternalMask ? "ExternalMask" : "KdeBaseline";
}

SegmenterBackend segmenter_backend_from_string(std::string_view s) {
  if (s == "KdeBaseline") return SegmenterBackend::kKdeBaseline;
  if (s == "ExternalMask") return SegmenterBackend::kExternalMask;
  throw InvalidInputError("unknown segmenter backend: " + std::string(s));
}

void SegmenterConfig::validate() const {
  if (!(kde_sigma_px > 0.0)) throw InvalidInputError("kde_sigma_px must be > 0");
  if (!(kde_threshold >= 0.0)) throw InvalidInputError("kde_threshold must be >= 0");
  if (!(binarize_threshold >= 0.0 && binarize_threshold <= 1.0)) {
    throw InvalidInputError("binarize_threshold must lie in [0, 1]");
  }
  if (backend == SegmenterBackend::kExternalMask &&
      external_mask_path_template.empty()) {
    throw InvalidInputError("ExternalMask backend needs a path template");
  }
}

void LabelConfig::validate() const {
  if (min_trace_support < 1) throw InvalidInputError("min_trace_support must be >= 1");
  if (centerline_thickness_px < 1) {
    throw InvalidInputError("centerline_thickness_px must be >= 1");
  }
}

void CpLossConfig::validate() const {
  if (!(sigma >= 0.0)) throw InvalidInputError("cp-loss sigma must be >= 0");
  if (!(binarize_threshold >= 0.0 && binarize_threshold <= 1.0)) {
    throw InvalidInputError("binarize_threshold must lie in [0, 1]");
  }
  if (!(epsilon > 0.0 && epsilon < 0.5)) {
    throw InvalidInputError("epsilon must lie in (0, 0.5)");
  }
}

RasterTile gaussian_blur(const RasterTile& tile, double sigma_px) {
  if (!(sigma_px > 0.0)) throw InvalidInputError("blur sigma must be > 0");
  const int radius = static_cast<int>(std::ceil(3.0 * sigma_px));
  std::vector<double> kernel(2 * radius + 1);
  double sum = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    kernel[k + radius] = std::exp(-0.5 * k * k / (sigma_px * sigma_px));
    sum += kernel[k + radius];
  }
  for (double& k : kernel) k /= sum;

  const int w = tile.spec.width_px;
  const int h = tile.spec.height_px;
  RasterTile tmp(tile.spec, tile.channel);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double v = tile.at(x, y);
      if (v == 0.0) continue;
      const int lo = std::max(-radius, -x), hi = std::min(radius, w - 1 - x);
      for (int k = lo; k <= hi; ++k) tmp.at(x + k, y) += v * kernel[k + radius];
    }
  }
  RasterTile out(tile.spec, tile.channel);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double v = tmp.at(x, y);
      if (v == 0.0) continue;
      const int lo = std::max(-radius, -y), hi = std::min(radius, h - 1 - y);
      for (int k = lo; k <= hi; ++k) out.at(x, y + k) += v * kernel[k + radius];
    }
  }
  return out;
}

std::string external_mask_path(const std::string& path_template, TileIndex index) {
  std::string path = path_template;
  replace_all(path, "{tile_x}", std::to_string(index.x));
  replace_all(path, "{tile_y}", std::to_string(index.y));
  return path;
}

RasterTile segment_tile(const SegmenterConfig& config,
                        const RasterTile& trace_density,
                        const RasterTile& lane_marking,
                        const RasterTile& road_boundary, TileIndex index) {
  config.validate();
  require_same_grid(trace_density, lane_marking);
  require_same_grid(trace_density, road_boundary);
  if (config.backend == SegmenterBackend::kExternalMask) {
    RasterTile mask =
        read_raster(external_mask_path(config.external_mask_path_template, index));
    if (!(mask.spec == trace_density.spec)) {
      throw InvalidInputError("external mask tile spec does not match the inputs");
    }
    mask.channel = Channel::kProbability;
    mask.validate();
    return mask;
  }
  const RasterTile blurred = gaussian_blur(trace_density, config.kde_sigma_px);
  RasterTile out(trace_density.spec, Channel::kProbability);
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    out.values[i] = blurred.values[i] >= config.kde_threshold ? 1.0 : 0.0;
  }
  return out;
}

RasterTile rasterize_edges(const RoadGraph& graph, const std::vector<EdgeId>& edges,
                           const TileSpec& spec, int thickness_px) {
  spec.validate();
  if (thickness_px < 1) throw InvalidInputError("thickness must be >= 1");
  RasterTile out(spec, Channel::kLabel);
  const int lo = -(thickness_px - 1) / 2;
  const int hi = thickness_px / 2;
  for (EdgeId id : edges) {
    walk_polyline_cells(graph.edge(id).polyline, spec,
                        [&](std::int64_t x, std::int64_t y) {
                          for (int dy = lo; dy <= hi; ++dy) {
                            for (int dx = lo; dx <= hi; ++dx) {
                              if (spec.contains(x + dx, y + dy)) {
                                out.at(x + dx, y + dy) = 1.0;
                              }
                            }
                          }
                        });
  }
  return out;
}

RasterTile make_labels(const RoadGraph& gt, const std::vector<GnssTrace>& traces,
                       const MapMatcher& matcher, const TileSpec& spec,
                       const LabelConfig& config, int workers) {
  config.validate();
  gt.validate();
  std::vector<EdgeId> kept;
  if (!traces.empty()) {
    const auto support = edge_support(matcher.match_all(traces, workers));
    for (const auto& [id, e] : gt.edges()) {
      const auto it = support.find(id);
      if (it != support.end() && it->second >= config.min_trace_support) {
        kept.push_back(id);
      }
    }
  }
  return rasterize_edges(gt, kept, spec, config.centerline_thickness_px);
}

RasterTile binarize(const RasterTile& mask, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw InvalidInputError("threshold must lie in [0, 1]");
  }
  RasterTile out(mask.spec, Channel::kLabel);
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    out.values[i] = mask.values[i] >= threshold ? 1.0 : 0.0;
  }
  return out;
}

BinaryGrid skeleton_mismatch(const BinaryGrid& pred, const BinaryGrid& label) {
  if (pred.width() != label.width() || pred.height() != label.height()) {
    throw InvalidInputError("mask shapes differ");
  }
  const BinaryGrid sp = skeletonize_guo_hall(pred);
  const BinaryGrid sl = skeletonize_guo_hall(label);
  const BinaryGrid dp = dilate_2x2(sp);
  const BinaryGrid dl = dilate_2x2(sl);
  BinaryGrid m(pred.width(), pred.height());
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      if ((sp.get(x, y) && !dl.get(x, y)) || (sl.get(x, y) && !dp.get(x, y))) {
        m.set(x, y);
      }
    }
  }
  return m;
}

CpLoss cp_loss(const RasterTile& pred, const RasterTile& label,
               const CpLossConfig& config) {
  config.validate();
  require_same_grid(pred, label);
  const double eps = config.epsilon;
  const std::size_t n = pred.values.size();
  if (n == 0) throw InvalidInputError("empty raster");

  std::vector<double> pixel_bce(n);
  double bce_sum = 0.0, py = 0.0, p_sum = 0.0, y_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = pred.values[i];
    const double y = label.values[i];
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidInputError("prediction outside [0, 1]");
    const double ph = std::clamp(p, eps, 1.0 - eps);
    pixel_bce[i] = -(y * std::log(ph) + (1.0 - y) * std::log(1.0 - ph));
    bce_sum += pixel_bce[i];
    py += p * y;
    p_sum += p;
    y_sum += y;
  }

  const BinaryGrid m = skeleton_mismatch(
      to_binary_grid(pred, config.binarize_threshold),
      to_binary_grid(label, config.binarize_threshold));
  double masked = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (m.cells()[i]) masked += pixel_bce[i];
  }

  CpLoss out;
  out.bce = bce_sum / static_cast<double>(n);
  out.dice = 1.0 - (2.0 * py + eps) / (p_sum + y_sum + eps);
  out.connectivity_penalty = config.sigma * masked / static_cast<double>(n);
  out.total = out.bce + out.dice + out.connectivity_penalty;
  return out;
}

}  // namespace roadinfer
