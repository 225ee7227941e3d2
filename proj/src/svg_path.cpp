#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <vector>

#include "geosvg/errors.hpp"
#include "geosvg/svg_scene.hpp"

namespace geosvg {
namespace {

enum class SegmentType { line, quad, cubic };

struct Segment {
  SegmentType type;
  Point p0, p1, p2, p3;  // unused control points are ignored per type
  Point end() const {
    switch (type) {
      case SegmentType::line: return p1;
      case SegmentType::quad: return p2;
      case SegmentType::cubic: return p3;
    }
    return p1;
  }
};

struct Subpath {
  Point start;
  std::vector<Segment> segments;
};

class PathTokenizer {
 public:
  explicit PathTokenizer(std::string_view d) : d_(d) {}

  void skip_separators() {
    while (pos_ < d_.size() && (std::isspace(static_cast<unsigned char>(d_[pos_])) || d_[pos_] == ',')) ++pos_;
  }

  bool at_end() {
    skip_separators();
    return pos_ >= d_.size();
  }

  bool next_is_number() {
    skip_separators();
    if (pos_ >= d_.size()) return false;
    const char c = d_[pos_];
    return std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.';
  }

  char command() {
    skip_separators();
    const char c = d_[pos_++];
    return c;
  }

  double number() {
    skip_separators();
    std::size_t start = pos_;
    if (start < d_.size() && d_[start] == '+') ++start;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(d_.data() + start, d_.data() + d_.size(), value);
    if (ec != std::errc() || ptr == d_.data() + start) {
      throw PathError("path data: expected number at offset " + std::to_string(pos_));
    }
    pos_ = static_cast<std::size_t>(ptr - d_.data());
    if (!std::isfinite(value)) throw PathError("path data: non-finite number");
    return value;
  }

 private:
  std::string_view d_;
  std::size_t pos_ = 0;
};

std::vector<Subpath> parse_path(std::string_view d) {
  PathTokenizer tok(d);
  std::vector<Subpath> subpaths;
  Point current;
  Point subpath_start;
  char cmd = 0;
  bool have_current = false;

  const auto segment_target = [&]() -> Subpath& {
    if (subpaths.empty() || !have_current) throw PathError("path data: drawing command before moveto");
    return subpaths.back();
  };

  while (!tok.at_end()) {
    if (!tok.next_is_number()) {
      cmd = tok.command();
    } else if (cmd == 0) {
      throw PathError("path data: number before first command");
    }
    const bool rel = std::islower(static_cast<unsigned char>(cmd)) != 0;
    const Point base = rel ? current : Point{0, 0};
    switch (std::toupper(static_cast<unsigned char>(cmd))) {
      case 'M': {
        const double x = tok.number();
        const double y = tok.number();
        // A relative moveto that opens the path is absolute.
        current = have_current ? Point{base.x + x, base.y + y} : Point{x, y};
        subpath_start = current;
        have_current = true;
        subpaths.push_back({current, {}});
        cmd = rel ? 'l' : 'L';  // subsequent pairs are implicit lineto
        break;
      }
      case 'L': {
        const double x = tok.number();
        const double y = tok.number();
        const Point p{base.x + x, base.y + y};
        segment_target().segments.push_back({SegmentType::line, current, p, {}, {}});
        current = p;
        break;
      }
      case 'H': {
        const double x = tok.number();
        const Point p{rel ? current.x + x : x, current.y};
        segment_target().segments.push_back({SegmentType::line, current, p, {}, {}});
        current = p;
        break;
      }
      case 'V': {
        const double y = tok.number();
        const Point p{current.x, rel ? current.y + y : y};
        segment_target().segments.push_back({SegmentType::line, current, p, {}, {}});
        current = p;
        break;
      }
      case 'C': {
        Point pts[3];
        for (Point& p : pts) {
          const double x = tok.number();
          const double y = tok.number();
          p = {base.x + x, base.y + y};
        }
        segment_target().segments.push_back({SegmentType::cubic, current, pts[0], pts[1], pts[2]});
        current = pts[2];
        break;
      }
      case 'Q': {
        Point pts[2];
        for (Point& p : pts) {
          const double x = tok.number();
          const double y = tok.number();
          p = {base.x + x, base.y + y};
        }
        segment_target().segments.push_back({SegmentType::quad, current, pts[0], pts[1], {}});
        current = pts[1];
        break;
      }
      case 'Z': {
        Subpath& sp = segment_target();
        if (current != subpath_start) sp.segments.push_back({SegmentType::line, current, subpath_start, {}, {}});
        current = subpath_start;
        // Drawing after Z without a moveto starts a new subpath at the same point.
        subpaths.push_back({current, {}});
        cmd = 0;
        if (tok.next_is_number()) throw PathError("path data: numbers after closepath");
        break;
      }
      default:
        throw PathError(std::string("path data: unsupported command '") + cmd + "'");
    }
  }
  if (subpaths.empty()) throw PathError("path data: empty path");
  return subpaths;
}

void transform_segments(std::vector<Subpath>& subpaths, const AffineTransform& t) {
  for (Subpath& sp : subpaths) {
    sp.start = t.apply(sp.start);
    for (Segment& s : sp.segments) {
      s.p0 = t.apply(s.p0);
      s.p1 = t.apply(s.p1);
      s.p2 = t.apply(s.p2);
      s.p3 = t.apply(s.p3);
    }
  }
}

// Parameter values in (0, 1) where the derivative of one coordinate vanishes.
void quad_extrema(double a, double b, double c, std::vector<double>& ts) {
  const double denom = a - 2 * b + c;
  if (denom != 0) {
    const double t = (a - b) / denom;
    if (t > 0 && t < 1) ts.push_back(t);
  }
}

void cubic_extrema(double p0, double p1, double p2, double p3, std::vector<double>& ts) {
  // Derivative / 3 = A t^2 + B t + C
  const double A = -p0 + 3 * p1 - 3 * p2 + p3;
  const double B = 2 * (p0 - 2 * p1 + p2);
  const double C = p1 - p0;
  if (std::abs(A) < 1e-12) {
    if (B != 0) {
      const double t = -C / B;
      if (t > 0 && t < 1) ts.push_back(t);
    }
    return;
  }
  const double disc = B * B - 4 * A * C;
  if (disc < 0) return;
  const double sq = std::sqrt(disc);
  for (double t : {(-B + sq) / (2 * A), (-B - sq) / (2 * A)}) {
    if (t > 0 && t < 1) ts.push_back(t);
  }
}

Point eval_segment(const Segment& s, double t) {
  const double u = 1 - t;
  switch (s.type) {
    case SegmentType::line: return {u * s.p0.x + t * s.p1.x, u * s.p0.y + t * s.p1.y};
    case SegmentType::quad:
      return {u * u * s.p0.x + 2 * u * t * s.p1.x + t * t * s.p2.x,
              u * u * s.p0.y + 2 * u * t * s.p1.y + t * t * s.p2.y};
    case SegmentType::cubic:
      return {u * u * u * s.p0.x + 3 * u * u * t * s.p1.x + 3 * u * t * t * s.p2.x + t * t * t * s.p3.x,
              u * u * u * s.p0.y + 3 * u * u * t * s.p1.y + 3 * u * t * t * s.p2.y + t * t * t * s.p3.y};
  }
  return s.p0;
}

}  // namespace

Endpoints path_endpoints(std::string_view path_data, const AffineTransform& transform) {
  std::vector<Subpath> subpaths = parse_path(path_data);
  const auto last_drawn = std::find_if(subpaths.rbegin(), subpaths.rend(),
                                       [](const Subpath& sp) { return !sp.segments.empty(); });
  if (last_drawn == subpaths.rend()) throw PathError("path data: no drawing segments");
  const auto first_drawn = std::find_if(subpaths.begin(), subpaths.end(),
                                        [](const Subpath& sp) { return !sp.segments.empty(); });
  return {transform.apply(first_drawn->start), transform.apply(last_drawn->segments.back().end())};
}

Rect path_bbox(std::string_view path_data, const AffineTransform& transform) {
  std::vector<Subpath> subpaths = parse_path(path_data);
  transform_segments(subpaths, transform);
  std::vector<Point> pts;
  for (const Subpath& sp : subpaths) {
    for (const Segment& s : sp.segments) {
      pts.push_back(s.p0);
      pts.push_back(s.end());
      std::vector<double> ts;
      if (s.type == SegmentType::quad) {
        quad_extrema(s.p0.x, s.p1.x, s.p2.x, ts);
        quad_extrema(s.p0.y, s.p1.y, s.p2.y, ts);
      } else if (s.type == SegmentType::cubic) {
        cubic_extrema(s.p0.x, s.p1.x, s.p2.x, s.p3.x, ts);
        cubic_extrema(s.p0.y, s.p1.y, s.p2.y, s.p3.y, ts);
      }
      for (double t : ts) pts.push_back(eval_segment(s, t));
    }
  }
  if (pts.empty()) throw PathError("path data: no drawing segments");
  Point lo = pts.front();
  Point hi = pts.front();
  for (const Point& p : pts) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
  }
  return Rect::from_corners(lo, hi);
}

}  // namespace geosvg
