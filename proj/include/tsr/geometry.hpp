#pragma once

#include <algorithm>
#include <cstdint>

namespace tsr {

// Axis-aligned box in pixel coordinates, inclusive on all four edges:
// a box with x1 == x2 is one pixel wide.
struct BBox {
  int x1 = 0;
  int y1 = 0;
  int x2 = 0;
  int y2 = 0;

  int width() const { return x2 - x1 + 1; }
  int height() const { return y2 - y1 + 1; }
  bool valid() const { return x1 <= x2 && y1 <= y2; }

  double center_x() const { return (x1 + x2) / 2.0; }
  double center_y() const { return (y1 + y2) / 2.0; }

  bool contains(const BBox& other) const {
    return x1 <= other.x1 && y1 <= other.y1 && x2 >= other.x2 && y2 >= other.y2;
  }

  bool operator==(const BBox& other) const = default;
};

// Tightest box containing both inputs.
inline BBox box_union(const BBox& a, const BBox& b) {
  return BBox{std::min(a.x1, b.x1), std::min(a.y1, b.y1),
              std::max(a.x2, b.x2), std::max(a.y2, b.y2)};
}

}  // namespace tsr
