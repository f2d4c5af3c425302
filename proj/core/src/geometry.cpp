#include "wsg/geometry.hpp"

#include <algorithm>

namespace wsg {

double iou(const Box& a, const Box& b) {
  if (!a.valid() || !b.valid()) throw InputError("iou: zero-area box");
  const double ix = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double iy = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (ix <= 0.0 || iy <= 0.0) return 0.0;
  const double inter = ix * iy;
  return inter / (a.area() + b.area() - inter);
}

}  // namespace wsg
