#include "geosvg/geometry.hpp"

#include <algorithm>
#include <numbers>

#include "geosvg/errors.hpp"

namespace geosvg {

Rect Rect::from_corners(Point p, Point q) {
  const double x0 = std::min(p.x, q.x);
  const double y0 = std::min(p.y, q.y);
  return {x0, y0, std::max(p.x, q.x) - x0, std::max(p.y, q.y) - y0};
}

double area_outside(const Rect& r, const Rect& clip) {
  if (clip.contains(r)) return 0.0;
  const double ix = std::max(0.0, std::min(r.right(), clip.right()) - std::max(r.left(), clip.left()));
  const double iy = std::max(0.0, std::min(r.bottom(), clip.bottom()) - std::max(r.top(), clip.top()));
  return std::max(0.0, r.area() - ix * iy);
}

Rect union_bbox(std::span<const Rect> rects) {
  if (rects.empty()) throw EmptyInput("union_bbox: no rectangles");
  double x0 = rects.front().left();
  double y0 = rects.front().top();
  double x1 = rects.front().right();
  double y1 = rects.front().bottom();
  for (const Rect& r : rects.subspan(1)) {
    x0 = std::min(x0, r.left());
    y0 = std::min(y0, r.top());
    x1 = std::max(x1, r.right());
    y1 = std::max(y1, r.bottom());
  }
  return {x0, y0, x1 - x0, y1 - y0};
}

AffineTransform AffineTransform::rotate(double degrees) {
  // Exact quarter turns keep axis-aligned geometry free of rounding noise.
  double s = 0.0;
  double c = 0.0;
  const double turns = degrees / 90.0;
  if (turns == std::floor(turns)) {
    static constexpr double kCos[] = {1, 0, -1, 0};
    static constexpr double kSin[] = {0, 1, 0, -1};
    long q = static_cast<long>(turns) % 4;
    if (q < 0) q += 4;
    c = kCos[q];
    s = kSin[q];
  } else {
    const double rad = degrees * std::numbers::pi / 180.0;
    c = std::cos(rad);
    s = std::sin(rad);
  }
  return {c, s, -s, c, 0, 0};
}

AffineTransform AffineTransform::rotate(double degrees, Point center) {
  return compose_transforms(
      translate(center.x, center.y),
      compose_transforms(rotate(degrees), translate(-center.x, -center.y)));
}

Rect AffineTransform::apply(const Rect& r) const {
  const std::array<Point, 4> corners = {apply(Point{r.left(), r.top()}), apply(Point{r.right(), r.top()}),
                                        apply(Point{r.left(), r.bottom()}),
                                        apply(Point{r.right(), r.bottom()})};
  double x0 = corners[0].x, x1 = corners[0].x, y0 = corners[0].y, y1 = corners[0].y;
  for (const Point& p : corners) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  return {x0, y0, x1 - x0, y1 - y0};
}

AffineTransform compose_transforms(const AffineTransform& p, const AffineTransform& q) {
  // Matrix product P * Q with column vectors [x y 1]^T.
  return {p.a * q.a + p.c * q.b,
          p.b * q.a + p.d * q.b,
          p.a * q.c + p.c * q.d,
          p.b * q.c + p.d * q.d,
          p.a * q.e + p.c * q.f + p.e,
          p.b * q.e + p.d * q.f + p.f};
}

}  // namespace geosvg
