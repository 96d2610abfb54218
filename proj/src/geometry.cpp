#include "detfuse/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <tuple>

#include "detfuse/errors.hpp"

namespace detfuse {

BoundingBox::BoundingBox(double x, double y, double w, double h)
    : x_(x), y_(y), w_(w), h_(h) {
  if (!(std::isfinite(x) && std::isfinite(y) && std::isfinite(w) &&
        std::isfinite(h))) {
    throw ValidationError("bounding box has non-finite coordinates");
  }
  if (!(w > 0.0 && h > 0.0)) {
    std::ostringstream msg;
    msg << "degenerate bounding box: w=" << w << " h=" << h;
    throw ValidationError(msg.str());
  }
  if (x < 0.0 || y < 0.0) {
    std::ostringstream msg;
    msg << "bounding box has a negative corner: x=" << x << " y=" << y;
    throw ValidationError(msg.str());
  }
}

double area(const BoundingBox& b) noexcept { return b.w() * b.h(); }

double iou(const BoundingBox& a0, const BoundingBox& b0) noexcept {
  // Canonical operand order: both call directions run identical
  // floating-point operations, so iou(a, b) == iou(b, a) exactly.
  const auto key = [](const BoundingBox& b) {
    return std::tuple(b.x(), b.y(), b.w(), b.h());
  };
  const bool in_order = key(a0) <= key(b0);
  const BoundingBox& a = in_order ? a0 : b0;
  const BoundingBox& b = in_order ? b0 : a0;

  const double iw = std::min(a.right(), b.right()) - std::max(a.x(), b.x());
  if (iw <= 0.0) return 0.0;
  const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.y(), b.y());
  if (ih <= 0.0) return 0.0;

  const double inter = iw * ih;
  // Areas come from the same corner arithmetic as the intersection, so
  // identical boxes give inter == area and the ratio is exactly 1.0.
  const double area_a = (a.right() - a.x()) * (a.bottom() - a.y());
  const double area_b = (b.right() - b.x()) * (b.bottom() - b.y());
  return inter / (area_a + area_b - inter);
}

}  // namespace detfuse
