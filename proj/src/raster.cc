#include "roadinfer/raster.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "roadinfer/error.h"

namespace roadinfer {

void TileSpec::validate() const {
  if (!(resolution > 0.0) || !std::isfinite(resolution)) {
    throw InvalidInputError("tile resolution must be > 0");
  }
  if (width_px <= 0 || height_px <= 0) {
    throw InvalidInputError("tile size must be positive");
  }
  if (!std::isfinite(origin.x) || !std::isfinite(origin.y)) {
    throw InvalidInputError("tile origin must be finite");
  }
}

Pixel TileSpec::pixel_of(const LocalPoint& p) const {
  return {static_cast<std::int64_t>(std::floor((p.x - origin.x) / resolution)),
          static_cast<std::int64_t>(std::floor((p.y - origin.y) / resolution))};
}

LocalPoint TileSpec::pixel_center(std::int64_t px, std::int64_t py) const {
  return {origin.x + (static_cast<double>(px) + 0.5) * resolution,
          origin.y + (static_cast<double>(py) + 0.5) * resolution, 0.0};
}

std::string_view to_string(Channel c) {
  switch (c) {
    case Channel::kTraceDensity:
      return "TraceDensity";
    case Channel::kLaneMarking:
      return "LaneMarking";
    case Channel::kRoadBoundary:
      return "RoadBoundary";
    case Channel::kProbability:
      return "Probability";
    case Channel::kLabel:
      return "Label";
  }
  return "TraceDensity";
}

Channel channel_from_string(std::string_view s) {
  for (Channel c : {Channel::kTraceDensity, Channel::kLaneMarking,
                    Channel::kRoadBoundary, Channel::kProbability,
                    Channel::kLabel}) {
    if (to_string(c) == s) return c;
  }
  throw InvalidInputError("unknown raster channel: " + std::string(s));
}

void RasterTile::validate() const {
  spec.validate();
  if (values.size() != spec.pixel_count()) {
    throw InvalidInputError("raster value count does not match tile size");
  }
  const bool unit = channel == Channel::kProbability || channel == Channel::kLabel;
  for (double v : values) {
    if (!(v >= 0.0) || (unit && v > 1.0)) {
      throw InvalidInputError("raster value out of range for channel " +
                              std::string(to_string(channel)));
    }
  }
}

TileGrid plan_tiles(const LocalPoint& min, const LocalPoint& max,
                    const TileSpec& spec_template) {
  spec_template.validate();
  if (!(max.x > min.x) || !(max.y > min.y)) {
    throw InvalidInputError("degenerate bounding box");
  }
  auto count = [](double span, double extent) {
    if (span <= extent) return 1;
    return static_cast<int>(std::ceil((span - extent) / (extent / 2.0) - 1e-9)) + 1;
  };
  const double w = spec_template.width_m();
  const double h = spec_template.height_m();
  TileGrid grid;
  grid.columns = count(max.x - min.x, w);
  grid.rows = count(max.y - min.y, h);
  for (int j = 0; j < grid.rows; ++j) {
    for (int i = 0; i < grid.columns; ++i) {
      TileSpec t = spec_template;
      t.origin = {min.x + i * w / 2.0, min.y + j * h / 2.0, 0.0};
      grid.tiles.push_back(t);
      grid.indices.push_back({i, j});
    }
  }
  return grid;
}

RasterTile rasterize_traces(const std::vector<GnssTrace>& traces,
                            const TileSpec& spec) {
  spec.validate();
  RasterTile out(spec, Channel::kTraceDensity);
  for (const GnssTrace& trace : traces) {
    walk_polyline_cells(trace.points, spec, [&](std::int64_t x, std::int64_t y) {
      out.at(x, y) += 1.0;
    });
  }
  return out;
}

RasterTile rasterize_points(const std::vector<SemanticPoint>& points,
                            SemanticClass cls, const TileSpec& spec) {
  spec.validate();
  RasterTile out(spec, cls == SemanticClass::kLaneMarking
                           ? Channel::kLaneMarking
                           : Channel::kRoadBoundary);
  for (const SemanticPoint& p : points) {
    if (p.semantic_class != cls) continue;
    const Pixel px = spec.pixel_of(p.position);
    if (spec.contains(px.x, px.y)) out.at(px.x, px.y) += 1.0;
  }
  return out;
}

RasterTile normalize(const RasterTile& tile) {
  RasterTile out = tile;
  for (double& v : out.values) {
    if (!(v >= 0.0)) throw InvalidInputError("cannot normalize negative value");
    v = std::log10(v + 1.0);
  }
  return out;
}

double merge_weight(const TileSpec& spec, std::int64_t px, std::int64_t py) {
  const double hw = spec.width_px / 2.0;
  const double hh = spec.height_px / 2.0;
  const double dx = (static_cast<double>(px) + 0.5 - hw) / hw;
  const double dy = (static_cast<double>(py) + 0.5 - hh) / hh;
  return 1.0 - 0.5 * std::max(std::abs(dx), std::abs(dy));
}

RasterTile merge_tiles(const std::vector<RasterTile>& masks) {
  if (masks.empty()) throw InvalidInputError("no masks to merge");
  const double res = masks.front().spec.resolution;
  double min_x = masks.front().spec.origin.x;
  double min_y = masks.front().spec.origin.y;
  double max_x = min_x, max_y = min_y;
  for (const RasterTile& m : masks) {
    m.validate();
    if (m.spec.resolution != res) {
      throw InvalidInputError("cannot merge masks with mixed resolutions");
    }
    if (m.channel != masks.front().channel) {
      throw InvalidInputError("cannot merge masks with mixed channels");
    }
    min_x = std::min(min_x, m.spec.origin.x);
    min_y = std::min(min_y, m.spec.origin.y);
    max_x = std::max(max_x, m.spec.origin.x + m.spec.width_m());
    max_y = std::max(max_y, m.spec.origin.y + m.spec.height_m());
  }

  TileSpec mosaic_spec;
  mosaic_spec.origin = {min_x, min_y, 0.0};
  mosaic_spec.resolution = res;
  mosaic_spec.width_px = static_cast<int>(std::lround((max_x - min_x) / res));
  mosaic_spec.height_px = static_cast<int>(std::lround((max_y - min_y) / res));

  // Reduce in a fixed spatial order so the result does not depend on the
  // order the caller enumerated the tiles in.
  std::vector<const RasterTile*> order;
  for (const RasterTile& m : masks) order.push_back(&m);
  std::sort(order.begin(), order.end(), [](const RasterTile* a, const RasterTile* b) {
    if (a->spec.origin.y != b->spec.origin.y) return a->spec.origin.y < b->spec.origin.y;
    return a->spec.origin.x < b->spec.origin.x;
  });

  // Accumulate deviations from the first contributing value so that constant
  // fields come out exact.
  std::vector<double> base(mosaic_spec.pixel_count(), 0.0);
  std::vector<double> sum_wd(mosaic_spec.pixel_count(), 0.0);
  std::vector<double> sum_w(mosaic_spec.pixel_count(), 0.0);
  for (const RasterTile* m : order) {
    const double fx = (m->spec.origin.x - min_x) / res;
    const double fy = (m->spec.origin.y - min_y) / res;
    const std::int64_t ox = std::llround(fx);
    const std::int64_t oy = std::llround(fy);
    if (std::abs(fx - ox) > 1e-6 || std::abs(fy - oy) > 1e-6) {
      throw InvalidInputError("masks are not aligned to a common pixel grid");
    }
    for (std::int64_t py = 0; py < m->spec.height_px; ++py) {
      for (std::int64_t px = 0; px < m->spec.width_px; ++px) {
        const double w = merge_weight(m->spec, px, py);
        const std::size_t k =
            static_cast<std::size_t>(py + oy) * mosaic_spec.width_px +
            static_cast<std::size_t>(px + ox);
        const double v = m->at(px, py);
        if (sum_w[k] == 0.0) base[k] = v;
        sum_wd[k] += w * (v - base[k]);
        sum_w[k] += w;
      }
    }
  }

  RasterTile out(mosaic_spec, masks.front().channel);
  const bool unit = out.channel == Channel::kProbability || out.channel == Channel::kLabel;
  for (std::size_t k = 0; k < out.values.size(); ++k) {
    double v = sum_w[k] > 0.0 ? base[k] + sum_wd[k] / sum_w[k] : 0.0;
    if (unit) v = std::clamp(v, 0.0, 1.0);
    out.values[k] = std::max(v, 0.0);
  }
  return out;
}

}  // namespace roadinfer
