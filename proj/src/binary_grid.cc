#include "roadinfer/binary_grid.h"

#include <algorithm>
#include <utility>

namespace roadinfer {

std::size_t BinaryGrid::count() const {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), 1));
}

BinaryGrid dilate_2x2(const BinaryGrid& grid) {
  BinaryGrid out(grid.width(), grid.height());
  for (int y = 0; y < grid.height(); ++y) {
    for (int x = 0; x < grid.width(); ++x) {
      if (grid.get(x, y) || grid.get(x - 1, y) || grid.get(x, y - 1) ||
          grid.get(x - 1, y - 1)) {
        out.set(x, y);
      }
    }
  }
  return out;
}

int count_components_8(const BinaryGrid& grid) {
  BinaryGrid seen(grid.width(), grid.height());
  std::vector<std::pair<int, int>> stack;
  int components = 0;
  for (int y = 0; y < grid.height(); ++y) {
    for (int x = 0; x < grid.width(); ++x) {
      if (!grid.get(x, y) || seen.get(x, y)) continue;
      ++components;
      seen.set(x, y);
      stack.push_back({x, y});
      while (!stack.empty()) {
        const auto [cx, cy] = stack.back();
        stack.pop_back();
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = cx + dx, ny = cy + dy;
            if (grid.get(nx, ny) && !seen.get(nx, ny)) {
              seen.set(nx, ny);
              stack.push_back({nx, ny});
            }
          }
        }
      }
    }
  }
  return components;
}

bool has_2x2_block(const BinaryGrid& grid) {
  for (int y = 0; y + 1 < grid.height(); ++y) {
    for (int x = 0; x + 1 < grid.width(); ++x) {
      if (grid.get(x, y) && grid.get(x + 1, y) && grid.get(x, y + 1) &&
          grid.get(x + 1, y + 1)) {
        return true;
      }
    }
  }
  return false;
}

int neighbor_count_8(const BinaryGrid& grid, int x, int y) {
  int n = 0;
  for (int dy = -1; dy <= 1; ++dy) {
    for (int dx = -1; dx <= 1; ++dx) {
      if ((dx != 0 || dy != 0) && grid.get(x + dx, y + dy)) ++n;
    }
  }
  return n;
}

}  // namespace roadinfer
