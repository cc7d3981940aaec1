#include "roadinfer/thinning.h"

#include <algorithm>
#include <array>
#include <utility>
#include <vector>

namespace roadinfer {
namespace {

// Neighbors p2..p9 clockwise starting at the row above:
// p9 p2 p3
// p8 p1 p4
// p7 p6 p5
struct Neighborhood {
  int p2, p3, p4, p5, p6, p7, p8, p9;

  Neighborhood(const BinaryGrid& g, int x, int y)
      : p2(g.get(x, y - 1)), p3(g.get(x + 1, y - 1)), p4(g.get(x + 1, y)),
        p5(g.get(x + 1, y + 1)), p6(g.get(x, y + 1)), p7(g.get(x - 1, y + 1)),
        p8(g.get(x - 1, y)), p9(g.get(x - 1, y - 1)) {}
};

// Neighbors x1..x8 counter-clockwise from east, y - 1 being north.
bool guo_hall_deletable(const BinaryGrid& g, int x, int y, int pass) {
  const std::array<int, 8> v{g.get(x + 1, y),     g.get(x + 1, y - 1),
                             g.get(x, y - 1),     g.get(x - 1, y - 1),
                             g.get(x - 1, y),     g.get(x - 1, y + 1),
                             g.get(x, y + 1),     g.get(x + 1, y + 1)};
  int c = 0, n1 = 0, n2 = 0;
  for (int i = 0; i < 8; i += 2) {
    c += !v[i] && (v[i + 1] || v[(i + 2) % 8]);
    n1 += v[i + 1] || v[i];
    n2 += v[i + 1] || v[(i + 2) % 8];
  }
  const int nmin = std::min(n1, n2);
  const bool m = pass == 0 ? (v[1] || v[2] || !v[7]) && v[0]
                           : (v[5] || v[6] || !v[3]) && v[4];
  return c == 1 && nmin >= 2 && nmin <= 3 && !m;
}

bool zhang_suen_deletable(const BinaryGrid& g, int x, int y, int pass) {
  const Neighborhood n(g, x, y);
  const int b = n.p2 + n.p3 + n.p4 + n.p5 + n.p6 + n.p7 + n.p8 + n.p9;
  const std::array<int, 9> ring{n.p2, n.p3, n.p4, n.p5, n.p6,
                                n.p7, n.p8, n.p9, n.p2};
  int a = 0;
  for (int i = 0; i < 8; ++i) a += (ring[i] == 0 && ring[i + 1] == 1);
  if (b < 2 || b > 6 || a != 1) return false;
  if (pass == 0) return n.p2 * n.p4 * n.p6 == 0 && n.p4 * n.p6 * n.p8 == 0;
  return n.p2 * n.p4 * n.p8 == 0 && n.p2 * n.p6 * n.p8 == 0;
}

using DeleteRule = bool (*)(const BinaryGrid&, int, int, int);

// One subiteration: mark in parallel, then delete the marked pixels that are
// still simple at deletion time. The re-check only rejects deletions that
// would change the topology, such as a 2x2 square vanishing under
// Zhang-Suen.
bool subiteration(BinaryGrid& g, DeleteRule rule, int pass,
                  std::vector<std::pair<int, int>>& marked) {
  marked.clear();
  for (int y = 0; y < g.height(); ++y) {
    for (int x = 0; x < g.width(); ++x) {
      if (g.get(x, y) && rule(g, x, y, pass)) marked.push_back({x, y});
    }
  }
  bool changed = false;
  for (const auto& [x, y] : marked) {
    if (neighbor_count_8(g, x, y) >= 2 && is_simple_pixel(g, x, y)) {
      g.set(x, y, false);
      changed = true;
    }
  }
  return changed;
}

// Removes one pixel from every remaining 2x2 block, choosing a simple
// non-endpoint pixel in scan order.
bool break_blocks(BinaryGrid& g) {
  bool changed = false;
  for (int y = 0; y + 1 < g.height(); ++y) {
    for (int x = 0; x + 1 < g.width(); ++x) {
      if (!(g.get(x, y) && g.get(x + 1, y) && g.get(x, y + 1) &&
            g.get(x + 1, y + 1))) {
        continue;
      }
      for (const auto& [cx, cy] : {std::pair{x, y}, std::pair{x + 1, y},
                                   std::pair{x, y + 1}, std::pair{x + 1, y + 1}}) {
        if (is_simple_pixel(g, cx, cy)) {
          g.set(cx, cy, false);
          changed = true;
          break;
        }
      }
    }
  }
  return changed;
}

BinaryGrid thin(const BinaryGrid& mask, DeleteRule rule) {
  BinaryGrid g = mask;
  std::vector<std::pair<int, int>> marked;
  do {
    bool changed = true;
    while (changed) {
      changed = subiteration(g, rule, 0, marked);
      changed = subiteration(g, rule, 1, marked) || changed;
    }
  } while (break_blocks(g));
  return g;
}

// Plain parallel subiterations: Guo-Hall alone keeps topology and leaves
// no 2x2 blocks.
bool parallel_subiteration(BinaryGrid& g, int pass, std::vector<std::pair<int, int>>& marked) {
  marked.clear();
  for (int y = 0; y < g.height(); ++y) {
    for (int x = 0; x < g.width(); ++x) {
      if (g.get(x, y) && guo_hall_deletable(g, x, y, pass)) marked.push_back({x, y});
    }
  }
  for (const auto& [x, y] : marked) g.set(x, y, false);
  return !marked.empty();
}

}  // namespace

bool is_simple_pixel(const BinaryGrid& g, int x, int y) {
  // x1..x8 counter-clockwise from east; x9 wraps to x1.
  const std::array<int, 9> v{g.get(x + 1, y),     g.get(x + 1, y - 1),
                             g.get(x, y - 1),     g.get(x - 1, y - 1),
                             g.get(x - 1, y),     g.get(x - 1, y + 1),
                             g.get(x, y + 1),     g.get(x + 1, y + 1),
                             g.get(x + 1, y)};
  int connectivity = 0;
  for (int k = 0; k < 8; k += 2) {
    const int a = 1 - v[k];
    const int b = 1 - v[k + 1];
    const int c = 1 - v[(k + 2) % 8];
    connectivity += a - a * b * c;
  }
  return connectivity == 1;
}

BinaryGrid skeletonize_guo_hall(const BinaryGrid& mask) {
  BinaryGrid g = mask;
  std::vector<std::pair<int, int>> marked;
  bool changed = true;
  while (changed) {
    changed = parallel_subiteration(g, 0, marked);
    changed = parallel_subiteration(g, 1, marked) || changed;
  }
  return g;
}

BinaryGrid skeletonize_zhang_suen(const BinaryGrid& mask) {
  return thin(mask, zhang_suen_deletable);
}

}  // namespace roadinfer
