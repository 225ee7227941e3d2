#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "geosvg/geometry.hpp"

namespace geosvg {

enum class AnchorKind { left_center, right_center, top_center, bottom_center };
enum class NodeType { box, group };

inline constexpr AnchorKind kAllAnchors[] = {AnchorKind::left_center, AnchorKind::right_center,
                                             AnchorKind::top_center, AnchorKind::bottom_center};

std::string_view to_string(AnchorKind kind);
std::optional<AnchorKind> parse_anchor_kind(std::string_view s);
std::string_view to_string(NodeType type);

struct NodeSpec {
  std::string id;
  NodeType type = NodeType::box;
  Rect bbox;
  std::string label;

  friend bool operator==(const NodeSpec&, const NodeSpec&) = default;
};

struct ConnectorSpec {
  std::string src_id;
  std::string dst_id;
  AnchorKind src_anchor = AnchorKind::right_center;
  AnchorKind dst_anchor = AnchorKind::left_center;

  friend bool operator==(const ConnectorSpec&, const ConnectorSpec&) = default;
};

using Edge = std::pair<std::string, std::string>;

// The geometric contract an SVG has to realize.
struct LayoutPlan {
  Rect canvas;  // x = y = 0
  std::vector<NodeSpec> nodes;
  std::vector<ConnectorSpec> connectors;
  std::vector<Edge> edges;

  std::optional<std::size_t> index_of(std::string_view id) const;
  const NodeSpec& node(std::string_view id) const;
  // Directed (src, dst) pairs of the connectors, first-occurrence order, duplicates dropped.
  std::vector<Edge> connector_edges() const;
  // Throws SchemaError naming the offending field.
  void validate() const;

  friend bool operator==(const LayoutPlan&, const LayoutPlan&) = default;
};

// Midpoint of the named side of `node.bbox`.
Point anchor_point(const NodeSpec& node, AnchorKind kind);

nlohmann::json plan_to_json(const LayoutPlan& plan);
LayoutPlan plan_from_json(const nlohmann::json& doc);
std::string serialize_plan(const LayoutPlan& plan);
LayoutPlan deserialize_plan(std::string_view text);

// Presentation settings for the ground-truth emitter.
struct StyleConfig {
  double font_size = 16.0;  // 12..20 px
  double stroke_width = 2.0;
  std::string stroke = "#334155";
  std::string box_fill = "#e8eef9";
  std::string group_fill = "#f6f7fb";
  std::string font_family = "Arial";
  bool arrowheads = true;
};

// Inner clearance between a label's measured box and its container sides (p + 4 px).
inline constexpr double kLabelInset = 10.0;

// Baseline for a label centered vertically in `box` under the builtin font metrics.
double centered_baseline(const Rect& box, double font_size);
// Baseline for a group caption placed kLabelInset below the top edge.
double caption_baseline(const Rect& box, double font_size);

// Deviations from the plan used to render defective variants. Keys are node ids and connector indices.
struct SvgOverrides {
  std::map<std::string, Rect> shapes;
  std::map<std::string, Point> label_offsets;
  std::map<std::size_t, std::pair<Point, Point>> connectors;

  bool empty() const { return shapes.empty() && label_offsets.empty() && connectors.empty(); }
};

// Emits rect/text/line markup realizing `plan`; connector lines end exactly on their anchors.
std::string emit_svg(const LayoutPlan& plan, const StyleConfig& style = {});
std::string emit_svg(const LayoutPlan& plan, const StyleConfig& style, const SvgOverrides& overrides);

}  // namespace geosvg
