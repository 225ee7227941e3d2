#include <gtest/gtest.h>

#include <string>

#include "geosvg/errors.hpp"
#include "geosvg/plan.hpp"
#include "geosvg/svg_scene.hpp"

using namespace geosvg;

namespace {

LayoutPlan two_node_plan() {
  LayoutPlan p;
  p.canvas = {0, 0, 800, 600};
  p.nodes = {{"A", NodeType::box, {50, 100, 150, 80}, "Encoder"}, {"B", NodeType::box, {350, 100, 150, 80}, "Decoder"}};
  p.connectors = {{"A", "B", AnchorKind::right_center, AnchorKind::left_center}};
  p.edges = {{"A", "B"}};
  return p;
}

SchemaError schema_error_of(const std::string& text) {
  try {
    deserialize_plan(text);
  } catch (const SchemaError& e) {
    return e;
  }
  ADD_FAILURE() << "no SchemaError for " << text;
  return SchemaError("", "");
}

}  // namespace

TEST(AnchorPoint, SideMidpoints) {
  const NodeSpec a{"a", NodeType::box, {100, 100, 200, 100}, "x"};
  EXPECT_EQ(anchor_point(a, AnchorKind::right_center), (Point{300, 150}));
  EXPECT_EQ(anchor_point(a, AnchorKind::left_center), (Point{100, 150}));
  EXPECT_EQ(anchor_point(a, AnchorKind::bottom_center), (Point{200, 200}));
  EXPECT_EQ(anchor_point({"b", NodeType::box, {0, 0, 10, 10}, "x"}, AnchorKind::top_center), (Point{5, 0}));
  EXPECT_EQ(anchor_point({"c", NodeType::box, {50, 60, 0, 0}, "x"}, AnchorKind::left_center), (Point{50, 60}));
}

TEST(PlanSerialization, RoundTrip) {
  LayoutPlan p = two_node_plan();
  p.nodes.push_back({"G", NodeType::group, {30, 60, 500, 150}, "Stage 1"});
  EXPECT_EQ(deserialize_plan(serialize_plan(p)), p);
  EXPECT_EQ(serialize_plan(deserialize_plan(serialize_plan(p))), serialize_plan(p));
}

TEST(PlanSerialization, UnknownNodeNamesField) {
  nlohmann::json doc = plan_to_json(two_node_plan());
  doc["connectors"][0]["dst_id"] = "Z";
  EXPECT_EQ(schema_error_of(doc.dump()).field(), "connectors[0].dst_id");
}

TEST(PlanSerialization, DuplicateIdRejected) {
  nlohmann::json doc = plan_to_json(two_node_plan());
  doc["nodes"][1]["id"] = "A";
  EXPECT_EQ(schema_error_of(doc.dump()).field(), "nodes[1].id");
}

TEST(PlanSerialization, OtherSchemaViolations) {
  nlohmann::json base = plan_to_json(two_node_plan());
  auto with = [&](auto mutate) {
    nlohmann::json d = base;
    mutate(d);
    return d.dump();
  };
  EXPECT_THROW(deserialize_plan("{"), SchemaError);
  EXPECT_THROW(deserialize_plan(with([](auto& d) { d["connectors"][0]["dst_id"] = "A"; })), SchemaError);
  EXPECT_THROW(deserialize_plan(with([](auto& d) { d["nodes"][0]["label"] = ""; })), SchemaError);
  EXPECT_THROW(deserialize_plan(with([](auto& d) { d["nodes"][0]["node_type"] = "blob"; })), SchemaError);
  EXPECT_THROW(deserialize_plan(with([](auto& d) { d["connectors"][0]["src_anchor"] = "corner"; })), SchemaError);
  EXPECT_THROW(deserialize_plan(with([](auto& d) { d["edges"] = nlohmann::json::array(); })), SchemaError);
  EXPECT_THROW(deserialize_plan(with([](auto& d) { d.erase("canvas"); })), SchemaError);
}

TEST(EmitSvg, ConnectorEndsOnAnchors) {
  const SvgScene scene = parse_svg(emit_svg(two_node_plan()));
  std::size_t lines = 0;
  for (const auto& e : scene.elements) {
    if (e.kind != ElementKind::line) continue;
    ++lines;
    ASSERT_TRUE(e.endpoints);
    EXPECT_EQ(e.endpoints->start, (Point{200, 140}));
    EXPECT_EQ(e.endpoints->end, (Point{350, 140}));
  }
  EXPECT_EQ(lines, 1u);
}

TEST(EmitSvg, NoConnectorsNoLines) {
  LayoutPlan p = two_node_plan();
  p.connectors.clear();
  p.edges.clear();
  const std::string svg = emit_svg(p);
  EXPECT_EQ(svg.find("<line"), std::string::npos);
  for (const auto& e : parse_svg(svg).elements) EXPECT_NE(e.kind, ElementKind::line);
}

TEST(EmitSvg, DeterministicAndSemantic) {
  const LayoutPlan p = two_node_plan();
  EXPECT_EQ(emit_svg(p), emit_svg(p));
  for (const auto& e : parse_svg(emit_svg(p)).elements) {
    EXPECT_TRUE(e.kind == ElementKind::rect || e.kind == ElementKind::text || e.kind == ElementKind::line ||
                e.kind == ElementKind::group || e.kind == ElementKind::other)
        << e.tag;
  }
}

TEST(EmitSvg, OverridesMoveShapesAndEnds) {
  const LayoutPlan p = two_node_plan();
  SvgOverrides o;
  o.connectors[0] = {{200, 140}, {360, 150}};
  o.shapes["A"] = {60, 100, 150, 80};
  const SvgScene scene = parse_svg(emit_svg(p, {}, o));
  bool saw_line = false, saw_rect = false;
  for (const auto& e : scene.elements) {
    if (e.kind == ElementKind::line) {
      saw_line = true;
      EXPECT_EQ(e.endpoints->end, (Point{360, 150}));
    }
    if (e.elem_id == "node-A") {
      saw_rect = true;
      EXPECT_EQ(e.global_bbox, (Rect{60, 100, 150, 80}));
    }
  }
  EXPECT_TRUE(saw_line && saw_rect);
}
