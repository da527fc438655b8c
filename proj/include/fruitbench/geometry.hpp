#pragma once

#include <array>

namespace fruitbench {

// Axis-aligned box in pixel coordinates, corner convention. Coordinates are
// real-valued; area is the plain coordinate product (no +1 pixel
// correction). Zero-area boxes are allowed, inverted or non-finite ones are
// rejected by the factory functions.
class BoundingBox {
 public:
  // Zero-area box at the origin.
  constexpr BoundingBox() = default;

  // Throws ValidationError if any coordinate is non-finite or the box is
  // inverted.
  static BoundingBox from_corners(double x_min, double y_min, double x_max,
                                  double y_max);
  // (x, y, w, h) with (x, y) the top-left corner; w, h >= 0.
  static BoundingBox from_top_left_size(double x, double y, double w,
                                        double h);
  // (cx, cy, w, h) as fractions of the image dimensions.
  static BoundingBox from_center_size_normalized(double cx, double cy,
                                                 double w, double h,
                                                 double img_w, double img_h);

  double x_min() const noexcept { return x_min_; }
  double y_min() const noexcept { return y_min_; }
  double x_max() const noexcept { return x_max_; }
  double y_max() const noexcept { return y_max_; }
  double width() const noexcept { return x_max_ - x_min_; }
  double height() const noexcept { return y_max_ - y_min_; }

  std::array<double, 4> corners() const noexcept {
    return {x_min_, y_min_, x_max_, y_max_};
  }
  // Top-left-size quadruple whose components reproduce the exact corner
  // coordinates when added back (see exact_extent).
  std::array<double, 4> top_left_size() const noexcept;
  std::array<double, 4> center_size_normalized(double img_w,
                                               double img_h) const;

  // Clamps into [0,img_w]x[0,img_h]. Boxes entirely outside collapse onto
  // the border with zero area.
  BoundingBox clamped(double img_w, double img_h) const noexcept;
  bool is_degenerate() const noexcept {
    return !(x_max_ > x_min_) || !(y_max_ > y_min_);
  }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;

 private:
  constexpr BoundingBox(double x_min, double y_min, double x_max,
                        double y_max)
      : x_min_(x_min), y_min_(y_min), x_max_(x_max), y_max_(y_max) {}

  double x_min_ = 0.0;
  double y_min_ = 0.0;
  double x_max_ = 0.0;
  double y_max_ = 0.0;
};

// Smallest extent w >= 0 with lo + w == hi in floating point, when one
// exists (always when 0 <= lo <= hi); otherwise hi - lo.
double exact_extent(double lo, double hi) noexcept;

double area(const BoundingBox& b) noexcept;
double intersection_area(const BoundingBox& a, const BoundingBox& b) noexcept;
BoundingBox enclosing_box(const BoundingBox& a, const BoundingBox& b) noexcept;

// Intersection over union; 0 when the union has zero area.
double iou(const BoundingBox& a, const BoundingBox& b) noexcept;

// Generalized IoU: IoU - |C \ (A u B)| / |C|, C the tightest enclosing box.
// Throws UndefinedInputError when both boxes are degenerate.
double giou(const BoundingBox& a, const BoundingBox& b);

// Sum of absolute differences of the normalized (cx, cy, w, h) components.
// Throws ValidationError on non-positive image dimensions.
double l1_box_distance(const BoundingBox& a, const BoundingBox& b,
                       double img_w, double img_h);

}  // namespace fruitbench
