#ifndef ROADINFER_THINNING_H_
#define ROADINFER_THINNING_H_

#include "roadinfer/binary_grid.h"

namespace roadinfer {

// Two-subiteration Guo-Hall thinning run to a fixpoint. The result is one
// pixel wide (no 2x2 foreground block) and keeps the number of 8-connected
// components of the input.
BinaryGrid skeletonize_guo_hall(const BinaryGrid& mask);

// Zhang-Suen thinning with the same output guarantees.
BinaryGrid skeletonize_zhang_suen(const BinaryGrid& mask);

// True if deleting (x, y) preserves local 8-connectivity: the Yokoi
// 8-connectivity number of the pixel is exactly one.
bool is_simple_pixel(const BinaryGrid& grid, int x, int y);

}  // namespace roadinfer

#endif  // ROADINFER_THINNING_H_
