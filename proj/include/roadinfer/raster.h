#ifndef ROADINFER_RASTER_H_
#define ROADINFER_RASTER_H_

#include <cstdint>
#include <cstdlib>
#include <string_view>
#include <utility>
#include <vector>

#include "roadinfer/core.h"

namespace roadinfer {

// Integer pixel coordinate; py grows northwards (rasters are y-up).
struct Pixel {
  std::int64_t x = 0;
  std::int64_t y = 0;

  friend bool operator==(const Pixel&, const Pixel&) = default;
  friend auto operator<=>(const Pixel&, const Pixel&) = default;
};

// Georeferenced pixel grid. `origin` is the south-west corner.
struct TileSpec {
  LocalPoint origin;
  double resolution = 1.0;  // meters per pixel
  int width_px = 1000;
  int height_px = 1000;

  void validate() const;

  // Half-open mapping: pixel = floor((p - origin) / resolution).
  Pixel pixel_of(const LocalPoint& p) const;
  LocalPoint pixel_center(std::int64_t px, std::int64_t py) const;
  bool contains(std::int64_t px, std::int64_t py) const {
    return px >= 0 && py >= 0 && px < width_px && py < height_px;
  }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width_px) * static_cast<std::size_t>(height_px);
  }
  double width_m() const { return width_px * resolution; }
  double height_m() const { return height_px * resolution; }

  friend bool operator==(const TileSpec&, const TileSpec&) = default;
};

enum class Channel : std::uint8_t {
  kTraceDensity = 0,
  kLaneMarking = 1,
  kRoadBoundary = 2,
  kProbability = 3,
  kLabel = 4,
};

std::string_view to_string(Channel c);
Channel channel_from_string(std::string_view s);

// Single-channel raster, row-major with row 0 at the southern edge.
struct RasterTile {
  TileSpec spec;
  Channel channel = Channel::kTraceDensity;
  std::vector<double> values;

  RasterTile() = default;
  RasterTile(const TileSpec& s, Channel c)
      : spec(s), channel(c), values(s.pixel_count(), 0.0) {}

  double& at(std::int64_t px, std::int64_t py) {
    return values[static_cast<std::size_t>(py) * spec.width_px +
                  static_cast<std::size_t>(px)];
  }
  double at(std::int64_t px, std::int64_t py) const {
    return values[static_cast<std::size_t>(py) * spec.width_px +
                  static_cast<std::size_t>(px)];
  }

  // Throws InvalidInputError on size mismatch, negative values, or
  // probability/label values outside [0, 1].
  void validate() const;
};

struct TileIndex {
  int x = 0;
  int y = 0;

  friend bool operator==(const TileIndex&, const TileIndex&) = default;
};

// Tiles laid out with 50% overlap. tiles[i] sits at grid position indices[i].
struct TileGrid {
  std::vector<TileSpec> tiles;
  std::vector<TileIndex> indices;
  int columns = 0;
  int rows = 0;
};

// Minimal half-stepped tile layout whose union covers [min, max].
TileGrid plan_tiles(const LocalPoint& min, const LocalPoint& max,
                    const TileSpec& spec_template);

// Visits the cells of Bresenham's line from (x0, y0) to (x1, y1), both
// endpoints included, in walk order. Emits max(|dx|, |dy|) + 1 cells.
template <typename Visitor>
void bresenham_line(std::int64_t x0, std::int64_t y0, std::int64_t x1,
                    std::int64_t y1, Visitor&& visit) {
  const std::int64_t dx = std::abs(x1 - x0);
  const std::int64_t dy = -std::abs(y1 - y0);
  const std::int64_t sx = x0 < x1 ? 1 : -1;
  const std::int64_t sy = y0 < y1 ? 1 : -1;
  std::int64_t err = dx + dy;
  while (true) {
    visit(x0, y0);
    if (x0 == x1 && y0 == y1) break;
    const std::int64_t e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

// Visits the Bresenham cells of a polyline chain in `spec`'s pixel grid,
// skipping cells outside the tile. The joint cell shared by consecutive
// segments is visited once.
template <typename Visitor>
void walk_polyline_cells(const std::vector<LocalPoint>& polyline,
                         const TileSpec& spec, Visitor&& visit) {
  for (std::size_t i = 1; i < polyline.size(); ++i) {
    const Pixel a = spec.pixel_of(polyline[i - 1]);
    const Pixel b = spec.pixel_of(polyline[i]);
    if (std::max(a.x, b.x) < 0 || std::max(a.y, b.y) < 0 ||
        std::min(a.x, b.x) >= spec.width_px ||
        std::min(a.y, b.y) >= spec.height_px) {
      continue;
    }
    bool first = true;
    bresenham_line(a.x, a.y, b.x, b.y, [&](std::int64_t x, std::int64_t y) {
      const bool skip = first && i > 1;
      first = false;
      if (!skip && spec.contains(x, y)) visit(x, y);
    });
  }
}

// Trace density: per trace, every consecutive point pair is drawn with
// Bresenham's algorithm and each traversed pixel incremented by one.
RasterTile rasterize_traces(const std::vector<GnssTrace>& traces,
                            const TileSpec& spec);

// Per-pixel count of in-tile points of class `cls`.
RasterTile rasterize_points(const std::vector<SemanticPoint>& points,
                            SemanticClass cls, const TileSpec& spec);

// log10(v + 1) of every pixel.
RasterTile normalize(const RasterTile& tile);

// Tile-merging weight of pixel (px, py): 1.0 at the tile center falling
// linearly to 0.5 at the border along the Chebyshev norm.
double merge_weight(const TileSpec& spec, std::int64_t px, std::int64_t py);

// Weighted average of overlapping masks on one pixel grid. The mosaic spans
// the union of the tiles; pixels no tile covers are 0.
RasterTile merge_tiles(const std::vector<RasterTile>& masks);

}  // namespace roadinfer

#endif  // ROADINFER_RASTER_H_
