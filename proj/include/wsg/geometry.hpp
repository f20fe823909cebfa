#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wsg::geom {

// Axis-aligned rectangle in continuous image coordinates, corner form.
// Invariant: x1 <= x2 and y1 <= y2. Zero-area boxes are legal (a box
// fully clipped away degenerates to a line or point).
struct Box {
  double x1 = 0.0, y1 = 0.0, x2 = 0.0, y2 = 0.0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }
  double center_x() const { return 0.5 * (x1 + x2); }
  double center_y() const { return 0.5 * (y1 + y2); }
  bool valid() const { return x1 <= x2 && y1 <= y2; }
  bool positive_size() const { return x2 > x1 && y2 > y1; }

  bool operator==(const Box&) const = default;
};

// Box-to-box regression offset: center shift normalized by the source
// size plus log size ratios. Dimensionless in all four components.
struct Offset {
  double tx = 0.0, ty = 0.0, tw = 0.0, th = 0.0;

  bool operator==(const Offset&) const = default;
};

// Intersection over union. Disjoint pairs give 0; a degenerate
// (zero-area) box on either side also gives 0, so there is no division
// by zero.
inline double iou(const Box& a, const Box& b) {
  double ix = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  double iy = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (ix <= 0.0 || iy <= 0.0) return 0.0;
  double inter = ix * iy;
  double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return inter / uni;
}

// Offset that maps src onto dst. src must have strictly positive size;
// dst must too (the log of a non-positive ratio is undefined).
inline Offset encode_offset(const Box& src, const Box& dst) {
  if (!src.positive_size()) throw std::invalid_argument("encode_offset: source box has non-positive size");
  if (!dst.positive_size()) throw std::invalid_argument("encode_offset: destination box has non-positive size");
  Offset d;
  d.tx = (dst.center_x() - src.center_x()) / src.width();
  d.ty = (dst.center_y() - src.center_y()) / src.height();
  d.tw = std::log(dst.width() / src.width());
  d.th = std::log(dst.height() / src.height());
  return d;
}

inline Box clip_box(const Box& b, const Box& bounds) {
  Box r;
  r.x1 = std::clamp(b.x1, bounds.x1, bounds.x2);
  r.y1 = std::clamp(b.y1, bounds.y1, bounds.y2);
  r.x2 = std::clamp(b.x2, bounds.x1, bounds.x2);
  r.y2 = std::clamp(b.y2, bounds.y1, bounds.y2);
  return r;
}

// Inverse of encode_offset followed by corner clipping to bounds.
inline Box apply_offset(const Box& src, const Offset& d, const Box& bounds) {
  double cx = src.center_x() + d.tx * src.width();
  double cy = src.center_y() + d.ty * src.height();
  double w = src.width() * std::exp(d.tw);
  double h = src.height() * std::exp(d.th);
  Box r{cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h};
  return clip_box(r, bounds);
}

// Point-game hit test: center of pred inside gt, boundary inclusive.
inline bool center_in(const Box& pred, const Box& gt) {
  double cx = pred.center_x();
  double cy = pred.center_y();
  return cx >= gt.x1 && cx <= gt.x2 && cy >= gt.y1 && cy <= gt.y2;
}

}  // namespace wsg::geom
