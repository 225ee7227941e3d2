#include "geosvg/svg_scene.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>

#include "geosvg/errors.hpp"
#include "geosvg/xml.hpp"

namespace geosvg {
namespace {

using StyleMap = std::map<std::string, std::string, std::less<>>;

// Subtrees that never render on their own. Marker geometry is supplied by the referencing
// connector, so marker content is skipped with the rest.
constexpr std::array<std::string_view, 16> kNonRendering = {
    "defs", "marker", "symbol", "clipPath", "mask", "pattern", "linearGradient", "radialGradient",
    "filter", "style", "title", "desc", "metadata", "script", "font", "font-face"};

constexpr std::array<std::string_view, 5> kInheritedProperties = {"font-size", "text-anchor", "font-family",
                                                                   "visibility", "font-weight"};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool parse_plain_number(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

// Unitless or px lengths only.
double parse_length(std::string_view s, const xml::Element& el, std::string_view attr) {
  std::string_view body = trim(s);
  if (body.ends_with("px")) body.remove_suffix(2);
  double v = 0.0;
  if (!parse_plain_number(body, v)) {
    throw ParseError("<" + el.name + "> attribute '" + std::string(attr) + "': unsupported number '" +
                         std::string(s) + "'",
                     el.line, el.column);
  }
  return v;
}

std::vector<double> parse_number_list(std::string_view s, const xml::Element& el, std::string_view attr) {
  std::vector<double> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (std::isspace(static_cast<unsigned char>(s[i])) || s[i] == ',')) ++i;
    if (i >= s.size()) break;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j])) && s[j] != ',') ++j;
    out.push_back(parse_length(s.substr(i, j - i), el, attr));
    i = j;
  }
  return out;
}

void apply_inline_style(std::string_view style, StyleMap& props) {
  std::size_t i = 0;
  while (i < style.size()) {
    std::size_t semi = style.find(';', i);
    if (semi == std::string_view::npos) semi = style.size();
    const std::string_view decl = style.substr(i, semi - i);
    const std::size_t colon = decl.find(':');
    if (colon != std::string_view::npos) {
      const std::string_view key = trim(decl.substr(0, colon));
      const std::string_view value = trim(decl.substr(colon + 1));
      if (!key.empty()) props[std::string(key)] = std::string(value);
    }
    i = semi + 1;
  }
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char c : s) {
    if (c == '\n' || c == '\r') continue;
    if (c == ' ' || c == '\t') {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += c;
  }
  return out;
}

double attr_length(const xml::Element& el, std::string_view name, double fallback) {
  const auto v = el.attribute(name);
  return v ? parse_length(*v, el, name) : fallback;
}

// Exact axis-aligned bounds of an affinely transformed ellipse.
Rect transformed_ellipse_bbox(const AffineTransform& t, Point c, double rx, double ry) {
  const Point center = t.apply(c);
  const double hw = std::hypot(t.a * rx, t.c * ry);
  const double hh = std::hypot(t.b * rx, t.d * ry);
  return {center.x - hw, center.y - hh, 2 * hw, 2 * hh};
}

AffineTransform viewbox_transform(const xml::Element& root, double vw, double vh, const std::vector<double>& vb) {
  const double sx = vw / vb[2];
  const double sy = vh / vb[3];
  std::string_view par = trim(root.attribute("preserveAspectRatio").value_or("xMidYMid meet"));
  if (par.starts_with("defer")) par = trim(par.substr(5));
  const std::string_view align = par.substr(0, par.find(' '));
  if (align == "none") return compose_transforms(AffineTransform::scale(sx, sy), AffineTransform::translate(-vb[0], -vb[1]));
  const bool slice = par.find("slice") != std::string_view::npos;
  const double s = slice ? std::max(sx, sy) : std::min(sx, sy);
  double tx = -vb[0] * s;
  double ty = -vb[1] * s;
  const double extra_x = vw - vb[2] * s;
  const double extra_y = vh - vb[3] * s;
  if (align.find("xMid") != std::string_view::npos) tx += extra_x / 2;
  if (align.find("xMax") != std::string_view::npos) tx += extra_x;
  if (align.find("YMid") != std::string_view::npos) ty += extra_y / 2;
  if (align.find("YMax") != std::string_view::npos) ty += extra_y;
  return {s, 0, 0, s, tx, ty};
}

class SceneBuilder {
 public:
  SceneBuilder(const FontModel& font, SvgScene& scene) : font_(font), scene_(scene) {}

  void walk_children(const xml::Element& parent, const AffineTransform& ctm, const StyleMap& inherited,
                     bool parent_visible, const std::string& parent_failure) {
    for (const xml::Element& child : parent.children) visit(child, ctm, inherited, parent_visible, parent_failure);
  }

 private:
  void visit(const xml::Element& el, const AffineTransform& parent_ctm, const StyleMap& inherited,
             bool parent_visible, const std::string& parent_failure) {
    const std::string_view name = el.local_name();
    if (std::find(kNonRendering.begin(), kNonRendering.end(), name) != kNonRendering.end()) return;
    // Foreign-namespace editor metadata (sodipodi:, inkscape:) is not part of the drawing.
    if (el.name.find(':') != std::string::npos && !el.name.starts_with("svg:")) return;
    if (name == "tspan" || name == "textPath") return;  // folded into the enclosing text

    SvgElement out;
    out.tag = std::string(name);
    if (const auto id = el.attribute("id")) out.elem_id = std::string(*id);

    StyleMap props;
    for (const auto key : kInheritedProperties) {
      if (const auto it = inherited.find(key); it != inherited.end()) props.insert(*it);
    }
    for (const auto& [k, v] : el.attributes) {
      if (k != "style") props[k] = v;
    }
    if (const auto style = el.attribute("style")) apply_inline_style(*style, props);
    out.style = props;

    const auto prop = [&](std::string_view key) -> std::string_view {
      const auto it = props.find(key);
      return it == props.end() ? std::string_view{} : std::string_view(it->second);
    };
    bool visible = parent_visible && prop("display") != "none";
    const bool hidden = prop("visibility") == "hidden" || prop("visibility") == "collapse";

    std::string failure = parent_failure;
    AffineTransform ctm = parent_ctm;
    if (const auto t = el.attribute("transform")) {
      try {
        ctm = compose_transforms(parent_ctm, parse_transform(*t));
      } catch (const PathError& e) {
        if (failure.empty()) failure = e.what();
      }
    }
    out.transform = ctm;
    out.visible = visible && !hidden;

    if (name == "g" || name == "a") {
      out.kind = ElementKind::group;
    } else if (name == "rect") {
      out.kind = ElementKind::rect;
      const double w = attr_length(el, "width", 0);
      const double h = attr_length(el, "height", 0);
      if (w < 0 || h < 0) {
        out.supported = false;
        out.diagnostic = "rect with negative size";
      }
      out.global_bbox = ctm.apply(Rect{attr_length(el, "x", 0), attr_length(el, "y", 0), std::max(w, 0.0), std::max(h, 0.0)});
    } else if (name == "circle") {
      out.kind = ElementKind::circle;
      const double r = attr_length(el, "r", 0);
      if (r < 0) {
        out.supported = false;
        out.diagnostic = "circle with negative radius";
      }
      out.global_bbox = transformed_ellipse_bbox(ctm, {attr_length(el, "cx", 0), attr_length(el, "cy", 0)}, std::max(r, 0.0), std::max(r, 0.0));
    } else if (name == "ellipse") {
      out.kind = ElementKind::ellipse;
      const double rx = attr_length(el, "rx", 0);
      const double ry = attr_length(el, "ry", 0);
      if (rx < 0 || ry < 0) {
        out.supported = false;
        out.diagnostic = "ellipse with negative radius";
      }
      out.global_bbox = transformed_ellipse_bbox(ctm, {attr_length(el, "cx", 0), attr_length(el, "cy", 0)}, std::max(rx, 0.0), std::max(ry, 0.0));
    } else if (name == "line") {
      out.kind = ElementKind::line;
      const Point a = ctm.apply(Point{attr_length(el, "x1", 0), attr_length(el, "y1", 0)});
      const Point b = ctm.apply(Point{attr_length(el, "x2", 0), attr_length(el, "y2", 0)});
      out.endpoints = Endpoints{a, b};
      out.global_bbox = Rect::from_corners(a, b);
    } else if (name == "polyline" || name == "polygon") {
      out.kind = name == "polyline" ? ElementKind::polyline : ElementKind::polygon;
      const std::vector<double> nums = parse_number_list(el.attribute("points").value_or(""), el, "points");
      if (nums.size() < 4 || nums.size() % 2 != 0) {
        out.supported = false;
        out.diagnostic = "<" + out.tag + "> needs an even number of coordinates and at least two points";
      } else {
        std::vector<Point> pts;
        for (std::size_t i = 0; i < nums.size(); i += 2) pts.push_back(ctm.apply(Point{nums[i], nums[i + 1]}));
        Point lo = pts.front(), hi = pts.front();
        for (const Point& p : pts) {
          lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
          hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
        }
        out.global_bbox = Rect::from_corners(lo, hi);
        if (out.kind == ElementKind::polyline) out.endpoints = Endpoints{pts.front(), pts.back()};
      }
    } else if (name == "path") {
      out.kind = ElementKind::path;
      const std::string_view d = el.attribute("d").value_or("");
      try {
        out.endpoints = path_endpoints(d, ctm);
        out.global_bbox = path_bbox(d, ctm);
      } catch (const PathError& e) {
        out.supported = false;
        out.diagnostic = e.what();
      }
    } else if (name == "text") {
      out.kind = ElementKind::text;
      measure_text_element(el, ctm, prop, out);
    } else {
      out.kind = ElementKind::other;
      out.supported = false;
      out.diagnostic = "unsupported element <" + out.tag + ">";
    }

    if (!failure.empty() && out.supported) {
      out.supported = false;
      out.diagnostic = failure;
    }
    if (out.kind == ElementKind::text && out.text_content && out.text_content->empty()) out.visible = false;

    scene_.elements.push_back(std::move(out));
    if (name == "g" || name == "a") walk_children(el, ctm, props, visible, failure);
  }

  template <typename Prop>
  void measure_text_element(const xml::Element& el, const AffineTransform& ctm, const Prop& prop, SvgElement& out) {
    out.text_content = collapse_whitespace(el.all_text());
    const auto first = [&](std::string_view attr) {
      const auto v = el.attribute(attr);
      if (!v) return 0.0;
      const std::vector<double> list = parse_number_list(*v, el, attr);
      return list.empty() ? 0.0 : list.front();
    };
    const Point anchor{first("x"), first("y")};
    double size = 16.0;
    if (const std::string_view fs = prop("font-size"); !fs.empty()) size = parse_length(fs, el, "font-size");
    if (size <= 0) {
      out.supported = false;
      out.diagnostic = "non-positive font-size";
      size = 0;
    }
    bool anchor_ok = true;
    const std::string_view anchor_kw = prop("text-anchor");
    const TextAnchor mode = anchor_kw.empty() ? TextAnchor::start : parse_text_anchor(anchor_kw, &anchor_ok);
    if (!anchor_ok) {
      out.supported = false;
      out.diagnostic = "unsupported text-anchor '" + std::string(anchor_kw) + "'";
    }
    out.font_size = size;
    const TextBox local = measure_text(*out.text_content, size, anchor, mode, font_);
    out.text_box = TextBox{ctm.apply(local.bbox), ctm.apply(anchor).y, mode};
    out.global_bbox = out.text_box->bbox;
  }

  const FontModel& font_;
  SvgScene& scene_;
};

}  // namespace

std::string_view to_string(ElementKind kind) {
  switch (kind) {
    case ElementKind::rect: return "rect";
    case ElementKind::circle: return "circle";
    case ElementKind::ellipse: return "ellipse";
    case ElementKind::line: return "line";
    case ElementKind::polyline: return "polyline";
    case ElementKind::polygon: return "polygon";
    case ElementKind::path: return "path";
    case ElementKind::text: return "text";
    case ElementKind::group: return "group";
    case ElementKind::other: return "other";
  }
  return "other";
}

bool SvgScene::geometry_ok() const {
  return parse_ok && std::all_of(elements.begin(), elements.end(), [](const SvgElement& e) { return e.supported; });
}

std::vector<std::string> SvgScene::diagnostics() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < elements.size(); ++i) {
    if (!elements[i].supported) {
      out.push_back("element " + std::to_string(i) + " <" + elements[i].tag + ">: " + elements[i].diagnostic);
    }
  }
  return out;
}

AffineTransform parse_transform(std::string_view text) {
  AffineTransform result;
  std::size_t i = 0;
  const auto skip = [&] {
    while (i < text.size() && (std::isspace(static_cast<unsigned char>(text[i])) || text[i] == ',')) ++i;
  };
  for (;;) {
    skip();
    if (i >= text.size()) break;
    const std::size_t name_start = i;
    while (i < text.size() && std::isalpha(static_cast<unsigned char>(text[i]))) ++i;
    const std::string_view fn = text.substr(name_start, i - name_start);
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (fn.empty() || i >= text.size() || text[i] != '(') throw PathError("transform: malformed list '" + std::string(text) + "'");
    const std::size_t close = text.find(')', i);
    if (close == std::string_view::npos) throw PathError("transform: missing ')'");
    std::vector<double> args;
    std::string_view body = text.substr(i + 1, close - i - 1);
    std::size_t j = 0;
    while (j < body.size()) {
      while (j < body.size() && (std::isspace(static_cast<unsigned char>(body[j])) || body[j] == ',')) ++j;
      if (j >= body.size()) break;
      std::size_t k = j;
      while (k < body.size() && !std::isspace(static_cast<unsigned char>(body[k])) && body[k] != ',') ++k;
      double v = 0.0;
      if (!parse_plain_number(body.substr(j, k - j), v)) throw PathError("transform: bad number in " + std::string(fn));
      args.push_back(v);
      j = k;
    }
    i = close + 1;

    AffineTransform t;
    const std::size_t n = args.size();
    if (fn == "translate" && (n == 1 || n == 2)) {
      t = AffineTransform::translate(args[0], n == 2 ? args[1] : 0.0);
    } else if (fn == "scale" && (n == 1 || n == 2)) {
      t = AffineTransform::scale(args[0], n == 2 ? args[1] : args[0]);
    } else if (fn == "rotate" && (n == 1 || n == 3)) {
      t = n == 1 ? AffineTransform::rotate(args[0]) : AffineTransform::rotate(args[0], {args[1], args[2]});
    } else if (fn == "matrix" && n == 6) {
      t = {args[0], args[1], args[2], args[3], args[4], args[5]};
    } else if (fn == "skewX" || fn == "skewY") {
      throw PathError("transform: skew is not supported");
    } else {
      throw PathError("transform: unsupported '" + std::string(fn) + "' with " + std::to_string(n) + " arguments");
    }
    result = compose_transforms(result, t);
  }
  return result;
}

SvgScene parse_svg(std::string_view xml_text, const FontModel& font) {
  const xml::Element root = xml::parse(xml_text);
  if (root.local_name() != "svg") throw ParseError("root element is <" + root.name + ">, expected <svg>", root.line, root.column);

  SvgScene scene;
  std::vector<double> viewbox;
  if (const auto vb = root.attribute("viewBox")) {
    viewbox = parse_number_list(*vb, root, "viewBox");
    if (viewbox.size() != 4 || viewbox[2] <= 0 || viewbox[3] <= 0) {
      throw ParseError("malformed viewBox", root.line, root.column);
    }
  }
  // Without explicit size the default 800x600 verification canvas applies.
  const double fallback_w = viewbox.empty() ? 800.0 : viewbox[2];
  const double fallback_h = viewbox.empty() ? 600.0 : viewbox[3];
  scene.canvas_width = attr_length(root, "width", fallback_w);
  scene.canvas_height = attr_length(root, "height", fallback_h);
  if (scene.canvas_width <= 0 || scene.canvas_height <= 0) {
    throw ParseError("canvas size must be positive", root.line, root.column);
  }

  AffineTransform root_ctm;
  if (!viewbox.empty()) root_ctm = viewbox_transform(root, scene.canvas_width, scene.canvas_height, viewbox);

  StyleMap root_props;
  for (const auto& [k, v] : root.attributes) {
    if (k != "style") root_props[k] = v;
  }
  if (const auto style = root.attribute("style")) apply_inline_style(*style, root_props);

  SceneBuilder builder(font, scene);
  builder.walk_children(root, root_ctm, root_props, root_props["display"] != "none", {});
  scene.parse_ok = true;
  return scene;
}

}  // namespace geosvg
