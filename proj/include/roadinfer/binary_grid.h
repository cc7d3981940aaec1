#ifndef ROADINFER_BINARY_GRID_H_
#define ROADINFER_BINARY_GRID_H_

#include <cstdint>
#include <vector>

namespace roadinfer {

// Dense binary image, row-major. Out-of-range reads return 0.
class BinaryGrid {
 public:
  BinaryGrid() = default;
  BinaryGrid(int width, int height)
      : width_(width), height_(height),
        cells_(static_cast<std::size_t>(width) * height, 0) {}

  int width() const { return width_; }
  int height() const { return height_; }

  bool get(int x, int y) const {
    if (x < 0 || y < 0 || x >= width_ || y >= height_) return false;
    return cells_[index(x, y)] != 0;
  }
  void set(int x, int y, bool v = true) { cells_[index(x, y)] = v ? 1 : 0; }

  std::size_t count() const;
  bool empty() const { return count() == 0; }
  const std::vector<std::uint8_t>& cells() const { return cells_; }

  friend bool operator==(const BinaryGrid&, const BinaryGrid&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> cells_;
};

// Dilation with a 2x2 structuring element anchored at its origin cell: every
// foreground cell also sets its +x, +y and +x+y neighbors (clipped).
BinaryGrid dilate_2x2(const BinaryGrid& grid);

// Number of 8-connected foreground components.
int count_components_8(const BinaryGrid& grid);

// True if some 2x2 window is entirely foreground.
bool has_2x2_block(const BinaryGrid& grid);

// Number of 8-neighbors set around (x, y).
int neighbor_count_8(const BinaryGrid& grid, int x, int y);

}  // namespace roadinfer

#endif  // ROADINFER_BINARY_GRID_H_
