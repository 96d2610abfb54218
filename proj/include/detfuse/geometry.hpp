#pragma once

namespace detfuse {

// Axis-aligned box in absolute pixels: (x, y) is the top-left corner, width
// and height are strictly positive. Degenerate or non-finite boxes are
// rejected at construction, so downstream code never has to re-check.
class BoundingBox {
 public:
  BoundingBox(double x, double y, double w, double h);

  double x() const noexcept { return x_; }
  double y() const noexcept { return y_; }
  double w() const noexcept { return w_; }
  double h() const noexcept { return h_; }
  double right() const noexcept { return x_ + w_; }
  double bottom() const noexcept { return y_ + h_; }

  bool operator==(const BoundingBox&) const noexcept = default;

 private:
  double x_;
  double y_;
  double w_;
  double h_;
};

// w * h, strictly positive for any constructed box.
double area(const BoundingBox& b) noexcept;

// Intersection over union in [0, 1]: 0 for disjoint boxes, exactly 1.0 for
// identical ones. Operands are put into a canonical order internally, so
// iou(a, b) and iou(b, a) run the same arithmetic and compare equal.
double iou(const BoundingBox& a, const BoundingBox& b) noexcept;

}  // namespace detfuse
