#include "fruitbench/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fruitbench/error.hpp"

namespace fruitbench {

namespace {

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    std::ostringstream os;
    os << "box coordinate " << what << " is not finite";
    throw ValidationError(os.str());
  }
}

void require_image_dims(double img_w, double img_h) {
  if (!(img_w > 0.0) || !(img_h > 0.0) || !std::isfinite(img_w) ||
      !std::isfinite(img_h)) {
    std::ostringstream os;
    os << "image dimensions must be positive, got " << img_w << "x" << img_h;
    throw ValidationError(os.str());
  }
}

}  // namespace

BoundingBox BoundingBox::from_corners(double x_min, double y_min, double x_max,
                                      double y_max) {
  require_finite(x_min, "x_min");
  require_finite(y_min, "y_min");
  require_finite(x_max, "x_max");
  require_finite(y_max, "y_max");
  if (x_max < x_min || y_max < y_min) {
    std::ostringstream os;
    os << "inverted box (" << x_min << ", " << y_min << ", " << x_max << ", "
       << y_max << ")";
    throw ValidationError(os.str());
  }
  return BoundingBox(x_min, y_min, x_max, y_max);
}

BoundingBox BoundingBox::from_top_left_size(double x, double y, double w,
                                            double h) {
  require_finite(w, "width");
  require_finite(h, "height");
  if (w < 0.0 || h < 0.0) {
    std::ostringstream os;
    os << "negative box size " << w << "x" << h;
    throw ValidationError(os.str());
  }
  return from_corners(x, y, x + w, y + h);
}

BoundingBox BoundingBox::from_center_size_normalized(double cx, double cy,
                                                     double w, double h,
                                                     double img_w,
                                                     double img_h) {
  require_image_dims(img_w, img_h);
  if (w < 0.0 || h < 0.0) {
    throw ValidationError("negative normalized box size");
  }
  const double half_w = 0.5 * w * img_w;
  const double half_h = 0.5 * h * img_h;
  return from_corners(cx * img_w - half_w, cy * img_h - half_h,
                      cx * img_w + half_w, cy * img_h + half_h);
}

std::array<double, 4> BoundingBox::top_left_size() const noexcept {
  return {x_min_, y_min_, exact_extent(x_min_, x_max_),
          exact_extent(y_min_, y_max_)};
}

std::array<double, 4> BoundingBox::center_size_normalized(double img_w,
                                                          double img_h) const {
  require_image_dims(img_w, img_h);
  return {0.5 * (x_min_ + x_max_) / img_w, 0.5 * (y_min_ + y_max_) / img_h,
          width() / img_w, height() / img_h};
}

BoundingBox BoundingBox::clamped(double img_w, double img_h) const noexcept {
  const double x0 = std::clamp(x_min_, 0.0, img_w);
  const double y0 = std::clamp(y_min_, 0.0, img_h);
  const double x1 = std::clamp(x_max_, 0.0, img_w);
  const double y1 = std::clamp(y_max_, 0.0, img_h);
  return BoundingBox(x0, y0, x1, y1);
}

double exact_extent(double lo, double hi) noexcept {
  double w = hi - lo;
  if (lo + w == hi) return w;
  // lo + w is monotone in w, so walk w by ulps toward hi.
  for (int step = 0; step < 64; ++step) {
    w = (lo + w < hi) ? std::nextafter(w, INFINITY)
                      : std::nextafter(w, -INFINITY);
    if (lo + w == hi) return std::max(w, 0.0);
  }
  return hi - lo;
}

double area(const BoundingBox& b) noexcept { return b.width() * b.height(); }

double intersection_area(const BoundingBox& a, const BoundingBox& b) noexcept {
  const double w = std::min(a.x_max(), b.x_max()) - std::max(a.x_min(), b.x_min());
  const double h = std::min(a.y_max(), b.y_max()) - std::max(a.y_min(), b.y_min());
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

BoundingBox enclosing_box(const BoundingBox& a, const BoundingBox& b) noexcept {
  return BoundingBox::from_corners(
      std::min(a.x_min(), b.x_min()), std::min(a.y_min(), b.y_min()),
      std::max(a.x_max(), b.x_max()), std::max(a.y_max(), b.y_max()));
}

double iou(const BoundingBox& a, const BoundingBox& b) noexcept {
  const double inter = intersection_area(a, b);
  const double uni = area(a) + area(b) - inter;
  if (uni <= 0.0) return 0.0;
  return std::min(1.0, inter / uni);
}

double giou(const BoundingBox& a, const BoundingBox& b) {
  if (a.is_degenerate() && b.is_degenerate()) {
    throw UndefinedInputError("giou is undefined for two degenerate boxes");
  }
  const double inter = intersection_area(a, b);
  const double uni = area(a) + area(b) - inter;
  const double hull = area(enclosing_box(a, b));
  // uni > 0 here; hull >= uni up to rounding of the union sum.
  const double iou_value = std::min(1.0, inter / uni);
  return iou_value - std::max(0.0, hull - uni) / hull;
}

double l1_box_distance(const BoundingBox& a, const BoundingBox& b,
                       double img_w, double img_h) {
  const auto na = a.center_size_normalized(img_w, img_h);
  const auto nb = b.center_size_normalized(img_w, img_h);
  double sum = 0.0;
  for (std::size_t i = 0; i < 4; ++i) sum += std::abs(na[i] - nb[i]);
  return sum;
}

}  // namespace fruitbench
