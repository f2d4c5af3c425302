#pragma once

#include "wsg/matrix.hpp"

namespace wsg {

/// Axis-aligned box in real pixel coordinates, x1 < x2 and y1 < y2.
struct Box {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;

  double area() const { return (x2 - x1) * (y2 - y1); }
  bool valid() const { return x2 > x1 && y2 > y1; }
};

/// Intersection over union; 0 for disjoint boxes. Throws InputError on a
/// zero-area box.
double iou(const Box& a, const Box& b);

}  // namespace wsg
