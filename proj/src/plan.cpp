#include "geosvg/plan.hpp"

#include <set>
#include <sstream>

#include "geosvg/errors.hpp"
#include "geosvg/format.hpp"
#include "geosvg/text_metrics.hpp"

namespace geosvg {

using nlohmann::json;

std::string_view to_string(AnchorKind kind) {
  switch (kind) {
    case AnchorKind::left_center: return "left-center";
    case AnchorKind::right_center: return "right-center";
    case AnchorKind::top_center: return "top-center";
    case AnchorKind::bottom_center: return "bottom-center";
  }
  return "left-center";
}

std::optional<AnchorKind> parse_anchor_kind(std::string_view s) {
  for (AnchorKind k : kAllAnchors) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

std::string_view to_string(NodeType type) { return type == NodeType::box ? "box" : "group"; }

Point anchor_point(const NodeSpec& node, AnchorKind kind) {
  const Rect& b = node.bbox;
  switch (kind) {
    case AnchorKind::left_center: return {b.left(), b.y + b.h / 2};
    case AnchorKind::right_center: return {b.right(), b.y + b.h / 2};
    case AnchorKind::top_center: return {b.x + b.w / 2, b.top()};
    case AnchorKind::bottom_center: return {b.x + b.w / 2, b.bottom()};
  }
  return b.center();
}

std::optional<std::size_t> LayoutPlan::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].id == id) return i;
  }
  return std::nullopt;
}

const NodeSpec& LayoutPlan::node(std::string_view id) const {
  const auto i = index_of(id);
  if (!i) throw SchemaError("nodes", "no node with id '" + std::string(id) + "'");
  return nodes[*i];
}

std::vector<Edge> LayoutPlan::connector_edges() const {
  std::vector<Edge> out;
  std::set<Edge> seen;
  for (const ConnectorSpec& c : connectors) {
    Edge e{c.src_id, c.dst_id};
    if (seen.insert(e).second) out.push_back(std::move(e));
  }
  return out;
}

void LayoutPlan::validate() const {
  if (canvas.x != 0 || canvas.y != 0) throw SchemaError("canvas", "canvas origin must be (0, 0)");
  if (!(canvas.w > 0) || !(canvas.h > 0)) throw SchemaError("canvas", "canvas size must be positive");
  std::set<std::string_view> ids;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const NodeSpec& n = nodes[i];
    const std::string at = "nodes[" + std::to_string(i) + "]";
    if (n.id.empty()) throw SchemaError(at + ".id", "empty id");
    if (!ids.insert(n.id).second) throw SchemaError(at + ".id", "duplicate node id '" + n.id + "'");
    if (!(n.bbox.w >= 0) || !(n.bbox.h >= 0)) throw SchemaError(at + ".bbox", "negative size");
    if (n.type == NodeType::box && n.label.empty()) throw SchemaError(at + ".label", "box node needs a label");
  }
  for (std::size_t i = 0; i < connectors.size(); ++i) {
    const ConnectorSpec& c = connectors[i];
    const std::string at = "connectors[" + std::to_string(i) + "]";
    if (!ids.contains(c.src_id)) throw SchemaError(at + ".src_id", "unknown node '" + c.src_id + "'");
    if (!ids.contains(c.dst_id)) throw SchemaError(at + ".dst_id", "unknown node '" + c.dst_id + "'");
    if (c.src_id == c.dst_id) throw SchemaError(at, "connector source equals target");
  }
  const std::vector<Edge> induced = connector_edges();
  if (std::set<Edge>(edges.begin(), edges.end()) != std::set<Edge>(induced.begin(), induced.end()) ||
      edges.size() != induced.size()) {
    throw SchemaError("edges", "edge list must equal the connector (source, target) pairs");
  }
}

json plan_to_json(const LayoutPlan& plan) {
  json nodes = json::array();
  for (const NodeSpec& n : plan.nodes) {
    nodes.push_back({{"id", n.id},
                     {"node_type", to_string(n.type)},
                     {"bbox", {{"x", n.bbox.x}, {"y", n.bbox.y}, {"w", n.bbox.w}, {"h", n.bbox.h}}},
                     {"label", n.label}});
  }
  json connectors = json::array();
  for (const ConnectorSpec& c : plan.connectors) {
    connectors.push_back({{"src_id", c.src_id},
                          {"dst_id", c.dst_id},
                          {"src_anchor", to_string(c.src_anchor)},
                          {"dst_anchor", to_string(c.dst_anchor)}});
  }
  json edges = json::array();
  for (const auto& [u, v] : plan.edges) edges.push_back(json::array({u, v}));
  return {{"canvas", {{"width", plan.canvas.w}, {"height", plan.canvas.h}}},
          {"nodes", std::move(nodes)},
          {"connectors", std::move(connectors)},
          {"edges", std::move(edges)}};
}

namespace {

const json& field(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) throw SchemaError(path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(path + "." + key, "missing field");
  return *it;
}

double number_field(const json& obj, const char* key, const std::string& path) {
  const json& v = field(obj, key, path);
  if (!v.is_number()) throw SchemaError(path + "." + key, "expected a number");
  return v.get<double>();
}

std::string string_field(const json& obj, const char* key, const std::string& path) {
  const json& v = field(obj, key, path);
  if (!v.is_string()) throw SchemaError(path + "." + key, "expected a string");
  return v.get<std::string>();
}

AnchorKind anchor_field(const json& obj, const char* key, const std::string& path) {
  const std::string s = string_field(obj, key, path);
  const auto kind = parse_anchor_kind(s);
  if (!kind) throw SchemaError(path + "." + key, "unknown anchor '" + s + "'");
  return *kind;
}

const json& array_field(const json& obj, const char* key) {
  const json& v = field(obj, key, "$");
  if (!v.is_array()) throw SchemaError(key, "expected an array");
  return v;
}

}  // namespace

LayoutPlan plan_from_json(const json& doc) {
  LayoutPlan plan;
  const json& canvas = field(doc, "canvas", "$");
  plan.canvas = {0, 0, number_field(canvas, "width", "canvas"), number_field(canvas, "height", "canvas")};

  const json& nodes = array_field(doc, "nodes");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string at = "nodes[" + std::to_string(i) + "]";
    NodeSpec n;
    n.id = string_field(nodes[i], "id", at);
    const std::string type = string_field(nodes[i], "node_type", at);
    if (type == "box") {
      n.type = NodeType::box;
    } else if (type == "group") {
      n.type = NodeType::group;
    } else {
      throw SchemaError(at + ".node_type", "unknown node type '" + type + "'");
    }
    const json& bbox = field(nodes[i], "bbox", at);
    n.bbox = {number_field(bbox, "x", at + ".bbox"), number_field(bbox, "y", at + ".bbox"),
              number_field(bbox, "w", at + ".bbox"), number_field(bbox, "h", at + ".bbox")};
    n.label = nodes[i].contains("label") ? string_field(nodes[i], "label", at) : std::string();
    plan.nodes.push_back(std::move(n));
  }

  const json& connectors = array_field(doc, "connectors");
  for (std::size_t i = 0; i < connectors.size(); ++i) {
    const std::string at = "connectors[" + std::to_string(i) + "]";
    plan.connectors.push_back({string_field(connectors[i], "src_id", at), string_field(connectors[i], "dst_id", at),
                               anchor_field(connectors[i], "src_anchor", at),
                               anchor_field(connectors[i], "dst_anchor", at)});
  }

  const json& edges = array_field(doc, "edges");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const json& e = edges[i];
    if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string()) {
      throw SchemaError("edges[" + std::to_string(i) + "]", "expected [source, target]");
    }
    plan.edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
  }
  plan.validate();
  return plan;
}

std::string serialize_plan(const LayoutPlan& plan) { return plan_to_json(plan).dump(2) + "\n"; }

LayoutPlan deserialize_plan(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError("$", e.what());
  }
  return plan_from_json(doc);
}

double centered_baseline(const Rect& box, double font_size) {
  const FontModel& f = FontModel::builtin();
  return box.y + box.h / 2 + (f.ascent - f.descent) / 2 * font_size;
}

double caption_baseline(const Rect& box, double font_size) {
  return box.y + kLabelInset + FontModel::builtin().ascent * font_size;
}

std::string emit_svg(const LayoutPlan& plan, const StyleConfig& style) { return emit_svg(plan, style, {}); }

std::string emit_svg(const LayoutPlan& plan, const StyleConfig& style, const SvgOverrides& overrides) {
  std::ostringstream out;
  const std::string w = format_number(plan.canvas.w);
  const std::string h = format_number(plan.canvas.h);
  const std::string stroke_w = format_number(style.stroke_width);
  const std::string font_size = format_number(style.font_size);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 "
      << w << ' ' << h << "\">\n";
  if (style.arrowheads && !plan.connectors.empty()) {
    out << "  <defs>\n"
        << "    <marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"10\" refY=\"5\" markerWidth=\"8\" "
           "markerHeight=\"8\" orient=\"auto-start-reverse\">\n"
        << "      <path d=\"M 0 0 L 10 5 L 0 10 z\" fill=\"" << style.stroke << "\"/>\n"
        << "    </marker>\n"
        << "  </defs>\n";
  }

  const auto emit_node = [&](const NodeSpec& n) {
    const bool group = n.type == NodeType::group;
    const auto shape_it = overrides.shapes.find(n.id);
    const Rect shape = shape_it == overrides.shapes.end() ? n.bbox : shape_it->second;
    out << "  <rect id=\"node-" << xml_escape(n.id) << "\" x=\"" << format_number(shape.x) << "\" y=\""
        << format_number(shape.y) << "\" width=\"" << format_number(shape.w) << "\" height=\""
        << format_number(shape.h) << "\" rx=\"6\" fill=\"" << (group ? style.group_fill : style.box_fill)
        << "\" stroke=\"" << style.stroke << "\" stroke-width=\"" << stroke_w << "\""
        << (group ? " stroke-dasharray=\"6 4\"" : "") << "/>\n";
    if (n.label.empty()) return;
    const auto off_it = overrides.label_offsets.find(n.id);
    const Point off = off_it == overrides.label_offsets.end() ? Point{0, 0} : off_it->second;
    const double baseline = group ? caption_baseline(n.bbox, style.font_size) : centered_baseline(n.bbox, style.font_size);
    out << "  <text id=\"label-" << xml_escape(n.id) << "\" x=\"" << format_number(n.bbox.x + n.bbox.w / 2 + off.x)
        << "\" y=\"" << format_number(baseline + off.y) << "\" font-family=\"" << style.font_family << "\" font-size=\""
        << font_size << "\" text-anchor=\"middle\">" << xml_escape(n.label) << "</text>\n";
  };
  // Containers first so boxes draw on top of them.
  for (const NodeSpec& n : plan.nodes) {
    if (n.type == NodeType::group) emit_node(n);
  }
  for (const NodeSpec& n : plan.nodes) {
    if (n.type == NodeType::box) emit_node(n);
  }
  for (std::size_t i = 0; i < plan.connectors.size(); ++i) {
    const ConnectorSpec& c = plan.connectors[i];
    Point a = anchor_point(plan.node(c.src_id), c.src_anchor);
    Point b = anchor_point(plan.node(c.dst_id), c.dst_anchor);
    if (const auto it = overrides.connectors.find(i); it != overrides.connectors.end()) {
      a = it->second.first;
      b = it->second.second;
    }
    out << "  <line id=\"edge-" << i << "\" x1=\"" << format_number(a.x) << "\" y1=\"" << format_number(a.y)
        << "\" x2=\"" << format_number(b.x) << "\" y2=\"" << format_number(b.y) << "\" stroke=\"" << style.stroke
        << "\" stroke-width=\"" << stroke_w << "\"" << (style.arrowheads ? " marker-end=\"url(#arrow)\"" : "")
        << "/>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace geosvg
