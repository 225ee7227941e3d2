#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "geosvg/geometry.hpp"
#include "geosvg/text_metrics.hpp"

namespace geosvg {

enum class ElementKind { rect, circle, ellipse, line, polyline, polygon, path, text, group, other };

std::string_view to_string(ElementKind kind);

struct Endpoints {
  Point start;
  Point end;

  friend bool operator==(const Endpoints&, const Endpoints&) = default;
};

// One element of a parsed document. Geometry is already in global (viewport) coordinates.
struct SvgElement {
  std::string elem_id;
  ElementKind kind = ElementKind::other;
  std::string tag;
  Rect global_bbox;
  std::optional<Endpoints> endpoints;  // line, polyline and path only
  std::optional<std::string> text_content;
  std::optional<TextBox> text_box;     // text only, global coordinates
  double font_size = 0.0;              // text only, in local units
  AffineTransform transform;           // local-to-global matrix
  std::map<std::string, std::string, std::less<>> style;
  bool visible = true;
  // False when the builtin engine cannot resolve this element's geometry (arc commands,
  // skew transforms, unknown tags). `diagnostic` says why.
  bool supported = true;
  std::string diagnostic;

  bool is_connector() const {
    return kind == ElementKind::line || kind == ElementKind::polyline || kind == ElementKind::path;
  }
  // Visible, geometric and resolved; the elements that make up B_all.
  bool has_geometry() const { return visible && supported && kind != ElementKind::group && kind != ElementKind::other; }
};

struct SvgScene {
  double canvas_width = 0.0;
  double canvas_height = 0.0;
  std::vector<SvgElement> elements;
  bool parse_ok = false;

  Rect canvas() const { return {0, 0, canvas_width, canvas_height}; }
  bool geometry_ok() const;
  std::vector<std::string> diagnostics() const;
};

// Parses SVG text into a scene. Throws ParseError for malformed XML, a non-svg root, or a
// numeric attribute that is not a unitless or px number. Elements whose geometry cannot be
// resolved are kept with `supported == false`.
SvgScene parse_svg(std::string_view xml_text, const FontModel& font = FontModel::builtin());

// Parses an SVG transform list (translate, scale, rotate, matrix). Throws PathError for skew
// or any other unsupported or malformed function.
AffineTransform parse_transform(std::string_view text);

// Start and end of a path's drawn geometry after applying `transform`. Supports M L H V C Q Z
// and their relative forms. Throws PathError for other commands or a path that draws nothing.
Endpoints path_endpoints(std::string_view path_data, const AffineTransform& transform);

// Tight bounding box of the transformed path, curve extrema included.
Rect path_bbox(std::string_view path_data, const AffineTransform& transform);

}  // namespace geosvg
