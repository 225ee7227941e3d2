#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "geosvg/corpus.hpp"
#include "geosvg/errors.hpp"
#include "geosvg/verifier.hpp"

using namespace geosvg;

namespace {

LayoutPlan chain_plan() {
  LayoutPlan p;
  p.canvas = {0, 0, 800, 600};
  p.nodes = {{"A", NodeType::box, {50, 100, 150, 80}, "Encoder"},
             {"B", NodeType::box, {300, 100, 150, 80}, "Decoder"},
             {"C", NodeType::box, {550, 100, 150, 80}, "Head"}};
  p.connectors = {{"A", "B", AnchorKind::right_center, AnchorKind::left_center},
                  {"B", "C", AnchorKind::right_center, AnchorKind::left_center}};
  p.edges = {{"A", "B"}, {"B", "C"}};
  return p;
}

GeometryReport report_with_bbox(Rect all) {
  GeometryReport r;
  r.render_valid = true;
  r.all_bbox = all;
  return r;
}

GeometryReport one_connector(Point start, Point end) {
  GeometryReport r;
  r.render_valid = true;
  r.connector_endpoints.push_back({0, {start, end}});
  return r;
}

LayoutPlan single_edge_plan() {
  LayoutPlan p;
  p.canvas = {0, 0, 800, 600};
  p.nodes = {{"A", NodeType::box, {200, 270, 100, 60}, "a"}, {"B", NodeType::box, {400, 270, 100, 60}, "b"}};
  p.connectors = {{"A", "B", AnchorKind::right_center, AnchorKind::left_center}};  // (300,300) -> (400,300)
  p.edges = {{"A", "B"}};
  return p;
}

TextPlacement placed(Rect text, Rect container) {
  TextPlacement t;
  t.content = "x";
  t.container_node_id = "A";
  t.container = container;
  t.box.bbox = text;
  return t;
}

}  // namespace

TEST(Weights, DefaultsMatchPublishedTable) {
  const WeightSet w;
  EXPECT_EQ(w.exec, 1.00);
  EXPECT_EQ(w.fit, 0.60);
  EXPECT_EQ(w.overflow, 0.50);
  EXPECT_EQ(w.anchor, 1.20);
  EXPECT_EQ(w.text, 1.10);
  EXPECT_EQ(w.padding, 0.50);
  EXPECT_EQ(w.graph, 0.90);
  EXPECT_EQ(w.clean, 0.30);
}

TEST(Verify, GroundTruthScoresPerfect) {
  const LayoutPlan p = chain_plan();
  const RewardBreakdown r = verify(emit_svg(p), p, {});
  EXPECT_EQ(r.exec, 1);
  EXPECT_EQ(r.fit, 1);
  EXPECT_EQ(r.overflow, 0);
  EXPECT_EQ(r.anchor_acc, 1);
  EXPECT_EQ(r.anchor_err, 0);
  EXPECT_EQ(r.text_in_box, 1);
  EXPECT_EQ(r.padding, 0);
  EXPECT_EQ(r.graph, 1);
  EXPECT_EQ(r.clean, 1);
  EXPECT_NEAR(r.total, 5.10, 1e-9);
}

TEST(Verify, GeneratedSamplesScorePerfect) {
  for (FamilyKind f : kAllFamilies) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const CorpusSample s = generate_sample(f, SplitSpec::defaults(SplitName::train), seed);
      const RewardBreakdown r = verify(s.svg, s.plan, {});
      EXPECT_NEAR(r.total, 5.10, 1e-9) << s.sample_id;
    }
  }
}

TEST(CheckExec, ValidityCases) {
  EXPECT_TRUE(check_exec(emit_svg(chain_plan())).valid);
  EXPECT_FALSE(check_exec("<svg xmlns=\"http://www.w3.org/2000/svg\"><rect x=\"1\"").valid);
  const ExecResult arc =
      check_exec(R"(<svg xmlns="http://www.w3.org/2000/svg"><path d="M 0 0 A 5 5 0 0 1 10 10"/></svg>)");
  EXPECT_FALSE(arc.valid);
  EXPECT_FALSE(arc.diagnostics.empty());
}

TEST(FitOverflow, Examples) {
  const Rect canvas{0, 0, 800, 600};
  FitResult f = fit_and_overflow(report_with_bbox({100, 100, 300, 200}), canvas, 1e-8);
  EXPECT_EQ(f.fit, 1);
  EXPECT_EQ(f.overflow, 0);
  f = fit_and_overflow(report_with_bbox({700, 0, 200, 100}), canvas, 1e-8);
  EXPECT_EQ(f.fit, 0);
  EXPECT_NEAR(f.overflow, -0.5, 1e-9);
  f = fit_and_overflow(report_with_bbox({900, 700, 50, 50}), canvas, 1e-8);
  EXPECT_EQ(f.fit, 0);
  EXPECT_NEAR(f.overflow, -1.0, 1e-9);
  EXPECT_GE(f.overflow, -1.0);
}

TEST(AnchorRewards, ExactHitAndThresholds) {
  const LayoutPlan p = single_edge_plan();
  const double diag = std::hypot(100.0, 60.0);
  AnchorResult a = anchor_rewards(one_connector({300, 300}, {400, 300}), p, {});
  EXPECT_EQ(a.acc, 1);
  EXPECT_EQ(a.err, 0);

  a = anchor_rewards(one_connector({300, 300}, {410, 300}), p, {});
  EXPECT_TRUE(a.endpoints[1].hit);
  EXPECT_NEAR(-a.endpoints[1].clamped_error, -0.08575, 1e-4);
  EXPECT_NEAR(a.err, -(10 / diag) / 2, 1e-12);

  a = anchor_rewards(one_connector({300, 300}, {413, 300}), p, {});
  EXPECT_FALSE(a.endpoints[1].hit);
  EXPECT_EQ(a.acc, 0.5);

  a = anchor_rewards(one_connector({300, 300}, {412, 300}), p, {});
  EXPECT_TRUE(a.endpoints[1].hit);
}

TEST(AnchorRewards, MissingConnectorCountsAsMiss) {
  GeometryReport r;
  r.render_valid = true;
  const AnchorResult a = anchor_rewards(r, single_edge_plan(), {});
  EXPECT_EQ(a.missing_connectors, 1u);
  EXPECT_EQ(a.acc, 0);
  EXPECT_EQ(a.err, -1);
}

TEST(AnchorRewards, EmptyPlanIsVacuous) {
  LayoutPlan p = single_edge_plan();
  p.connectors.clear();
  p.edges.clear();
  const AnchorResult a = anchor_rewards({}, p, {});
  EXPECT_EQ(a.acc, 1);
  EXPECT_EQ(a.err, 0);
}

TEST(AnchorRewards, ErrorSaturatesAtOneDiagonal) {
  const AnchorResult a = anchor_rewards(one_connector({300, 300}, {4000, 3000}), single_edge_plan(), {});
  EXPECT_EQ(a.endpoints[1].clamped_error, 1.0);
  EXPECT_GE(a.err, -1.0);
}

TEST(TextRewards, MarginCases) {
  const Rect box{100, 100, 200, 100};
  GeometryReport r;
  r.text_boxes = {placed({110, 110, 80, 20}, box)};
  TextResult t = text_rewards(r, {}, {});
  EXPECT_EQ(t.in_box, 1);
  EXPECT_EQ(t.padding, 0);
  EXPECT_EQ(*t.texts[0].margin, 10);

  r.text_boxes = {placed({104, 110, 80, 20}, box)};
  t = text_rewards(r, {}, {});
  EXPECT_EQ(t.in_box, 1);
  EXPECT_EQ(t.padding, -1);

  r.text_boxes = {placed({90, 110, 80, 20}, box)};
  t = text_rewards(r, {}, {});
  EXPECT_EQ(t.in_box, 0);
  EXPECT_EQ(t.padding, -1);

  TextPlacement orphan;
  orphan.box.bbox = {0, 0, 10, 10};
  r.text_boxes = {orphan};
  t = text_rewards(r, {}, {});
  EXPECT_EQ(t.unmatched, 1u);
  EXPECT_EQ(t.in_box, 0);
  EXPECT_EQ(t.padding, -1);

  t = text_rewards(GeometryReport{}, {}, {});
  EXPECT_EQ(t.in_box, 1);
  EXPECT_EQ(t.padding, 0);
}

TEST(Graph, ExtractionAndF1) {
  const LayoutPlan p = chain_plan();
  const SvgScene scene = parse_svg(emit_svg(p));
  const GeometryReport r = extract_geometry(scene, p, {});
  EXPECT_EQ(r.extracted_edges, (std::set<Edge>{{"A", "B"}, {"B", "C"}}));

  GeometryReport moved = r;
  moved.connector_endpoints[0].ends.end.y += 30;
  EXPECT_EQ(extract_graph(moved, p, {}), (std::set<Edge>{{"B", "C"}}));

  const std::set<Edge> ab_bc{{"A", "B"}, {"B", "C"}};
  EXPECT_NEAR(graph_reward(ab_bc, ab_bc, 1e-8), 1.0, 1e-8);
  EXPECT_NEAR(graph_reward(ab_bc, {{"A", "B"}, {"B", "C"}, {"C", "D"}}, 1e-8), 0.8, 1e-8);
  EXPECT_EQ(graph_reward({}, {}, 1e-8), 1.0);
  EXPECT_EQ(graph_reward({}, ab_bc, 1e-8), 0.0);
  EXPECT_EQ(graph_reward(ab_bc, {}, 1e-8), 0.0);
}

TEST(Graph, EquidistantTieGoesToEarlierNode) {
  LayoutPlan p;
  p.canvas = {0, 0, 800, 600};
  // A's right anchor (100,50) and B's left anchor (120,50) are both 10 px from (110,50).
  p.nodes = {{"A", NodeType::box, {0, 0, 100, 100}, "a"},
             {"B", NodeType::box, {120, 0, 100, 100}, "b"},
             {"C", NodeType::box, {400, 0, 100, 100}, "c"}};
  p.connectors = {{"C", "A", AnchorKind::left_center, AnchorKind::right_center}};
  p.edges = {{"C", "A"}};
  EXPECT_EQ(extract_graph(one_connector({400, 50}, {110, 50}), p, {}), (std::set<Edge>{{"C", "A"}}));
}

TEST(Clean, Counting) {
  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\">";
  for (int i = 0; i < 5; ++i) svg += "<rect x=\"0\" y=\"0\" width=\"1\" height=\"1\"/><text x=\"0\" y=\"9\">t</text>";
  for (int i = 0; i < 4; ++i) svg += "<line x1=\"0\" y1=\"0\" x2=\"1\" y2=\"1\"/>";
  svg += "<g><path d=\"M 0 0 L 1 1\"/><path d=\"M 0 0 L 2 2\"/></g></svg>";
  EXPECT_NEAR(clean_reward(parse_svg(svg), 1e-8), 0.875, 1e-8);
  EXPECT_NEAR(clean_reward(parse_svg(emit_svg(chain_plan())), 1e-8), 1.0, 1e-8);
  EXPECT_NEAR(
      clean_reward(parse_svg("<svg xmlns=\"http://www.w3.org/2000/svg\"><path d=\"M 0 0 L 1 1\"/></svg>"), 1e-8), 0.0,
      1e-8);
}

TEST(TotalReward, Examples) {
  RewardBreakdown c;
  c.exec = c.fit = c.anchor_acc = c.text_in_box = c.graph = c.clean = 1;
  EXPECT_NEAR(total_reward(c, {}), 5.10, 1e-12);
  c.overflow = -0.5;
  EXPECT_NEAR(total_reward(c, {}), 4.85, 1e-12);
  c.exec = 0;
  EXPECT_EQ(total_reward(c, {}), 0.0);
}

TEST(Verify, ExecFailureGatesTotal) {
  const RewardBreakdown r = verify("<svg", chain_plan(), {});
  EXPECT_EQ(r.exec, 0);
  EXPECT_EQ(r.total, 0);
  WeightSet heavy;
  heavy.clean = 100;
  EXPECT_EQ(verify("<svg", chain_plan(), {}, heavy).total, 0);
}

TEST(Curriculum, Schedule) {
  const WeightSet base;
  EXPECT_EQ(curriculum_weights(base, 0).fit, 0);
  EXPECT_EQ(curriculum_weights(base, 0).overflow, 0);
  EXPECT_EQ(curriculum_weights(base, 499).fit, 0);
  EXPECT_NEAR(curriculum_weights(base, 750).fit, 0.30, 1e-12);
  EXPECT_NEAR(curriculum_weights(base, 750).overflow, 0.25, 1e-12);
  EXPECT_EQ(curriculum_weights(base, 1500), base);
  EXPECT_EQ(curriculum_weights(base, 1000), base);
  EXPECT_EQ(curriculum_weights(base, 750).anchor, base.anchor);
}

TEST(Config, LoadAndValidate) {
  const VerifierConfig c = load_verifier_config(R"({"anchor_threshold": 8, "weights": {"clean": 0.5}})");
  EXPECT_EQ(c.anchor_threshold, 8);
  EXPECT_EQ(c.weights.clean, 0.5);
  EXPECT_EQ(c.weights.fit, 0.6);
  EXPECT_THROW(load_verifier_config(R"({"anchor_threshold": 0})"), FormatError);
  EXPECT_THROW(load_verifier_config(R"({"padding": -1})"), FormatError);
  EXPECT_THROW(load_verifier_config("[1,2"), FormatError);
}

// Endpoint displacement along the outward normal, growing magnitude.
TEST(Verify, EndpointShiftMonotone) {
  const CorpusSample s = generate_sample(FamilyKind::horizontal_pipeline, SplitSpec::defaults(SplitName::train), 3);
  double prev_acc = 2, prev_err = 1;
  for (double m : {0.0, 2.0, 6.0, 11.0, 13.0, 20.0, 40.0, 80.0, 500.0}) {
    const std::string svg = render_with_defects(s, {{CorruptionKind::endpoint_shift, m, 0}}, 1);
    const RewardBreakdown r = verify(svg, s.plan, {});
    EXPECT_LE(r.anchor_acc, prev_acc);
    EXPECT_LE(r.anchor_err, prev_err);
    prev_acc = r.anchor_acc;
    prev_err = r.anchor_err;
  }
}

TEST(Verify, RangesOnArbitraryInput) {
  const LayoutPlan p = chain_plan();
  const std::string inputs[] = {
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"10\" height=\"10\"><rect x=\"-500\" y=\"0\" width=\"2000\" "
      "height=\"5\"/><text x=\"0\" y=\"0\">Head</text><line x1=\"0\" y1=\"0\" x2=\"999\" y2=\"999\"/></svg>",
      "<svg xmlns=\"http://www.w3.org/2000/svg\"/>",
      "<svg xmlns=\"http://www.w3.org/2000/svg\"><path d=\"M 0 0 Q 5 5 9 0\"/></svg>",
  };
  for (const std::string& svg : inputs) {
    const RewardBreakdown r = verify(svg, p, {});
    for (double v : {r.exec, r.fit, r.anchor_acc, r.text_in_box, r.graph, r.clean}) {
      EXPECT_GE(v, 0);
      EXPECT_LE(v, 1);
    }
    for (double v : {r.overflow, r.anchor_err, r.padding}) {
      EXPECT_GE(v, -1);
      EXPECT_LE(v, 0);
    }
  }
}

TEST(Verify, EpsilonStable) {
  const CorpusSample s = generate_sample(FamilyKind::branching_flow, SplitSpec::defaults(SplitName::train), 9);
  const std::string svg = render_with_defects(s, {{CorruptionKind::canvas_overflow, 30, 0}}, 1);
  VerifierConfig lo, hi;
  lo.epsilon = 1e-10;
  hi.epsilon = 1e-6;
  EXPECT_NEAR(verify(svg, s.plan, lo).total, verify(svg, s.plan, hi).total, 1e-6);
}
