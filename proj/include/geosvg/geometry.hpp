#pragma once

#include <array>
#include <cmath>
#include <span>

namespace geosvg {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

// Axis-aligned box in a y-down coordinate system; (x, y) is the top-left corner.
struct Rect {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double left() const { return x; }
  double top() const { return y; }
  double right() const { return x + w; }
  double bottom() const { return y + h; }
  double area() const { return w * h; }
  Point center() const { return {x + w / 2.0, y + h / 2.0}; }
  double diagonal() const { return std::hypot(w, h); }

  static Rect from_corners(Point a, Point b);

  bool contains(const Rect& inner) const {
    return inner.left() >= left() && inner.top() >= top() && inner.right() <= right() &&
           inner.bottom() <= bottom();
  }

  friend bool operator==(const Rect&, const Rect&) = default;
};

// Area of the part of `r` that lies outside `clip`.
double area_outside(const Rect& r, const Rect& clip);

// Smallest axis-aligned rectangle containing every input. Throws EmptyInput on an empty span.
Rect union_bbox(std::span<const Rect> rects);

// Maps (x, y) to (a*x + c*y + e, b*x + d*y + f), the SVG matrix(a b c d e f) convention.
struct AffineTransform {
  double a = 1.0;
  double b = 0.0;
  double c = 0.0;
  double d = 1.0;
  double e = 0.0;
  double f = 0.0;

  static AffineTransform identity() { return {}; }
  static AffineTransform translate(double tx, double ty) { return {1, 0, 0, 1, tx, ty}; }
  static AffineTransform scale(double sx, double sy) { return {sx, 0, 0, sy, 0, 0}; }
  // Angle in degrees, positive is clockwise on screen (y-down), as in SVG.
  static AffineTransform rotate(double degrees);
  static AffineTransform rotate(double degrees, Point center);

  Point apply(Point p) const { return {a * p.x + c * p.y + e, b * p.x + d * p.y + f}; }
  // Bounding box of the four transformed corners.
  Rect apply(const Rect& r) const;
  bool is_identity() const { return a == 1 && b == 0 && c == 0 && d == 1 && e == 0 && f == 0; }

  friend bool operator==(const AffineTransform&, const AffineTransform&) = default;
};

// Returns the transform that applies `child` first and then `parent`.
AffineTransform compose_transforms(const AffineTransform& parent, const AffineTransform& child);

}  // namespace geosvg
