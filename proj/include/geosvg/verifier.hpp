#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "geosvg/geometry.hpp"
#include "geosvg/plan.hpp"
#include "geosvg/svg_scene.hpp"
#include "geosvg/text_metrics.hpp"

namespace geosvg {

class GeometryOracle;

// Reward weights; defaults are the published weight table.
struct WeightSet {
  double exec = 1.00;
  double fit = 0.60;
  double overflow = 0.50;
  double anchor = 1.20;
  double text = 1.10;
  double padding = 0.50;
  double graph = 0.90;
  double clean = 0.30;

  friend bool operator==(const WeightSet&, const WeightSet&) = default;
};

nlohmann::json weights_to_json(const WeightSet& w);
WeightSet weights_from_json(const nlohmann::json& doc, WeightSet base = {});

struct VerifierConfig {
  double anchor_threshold = 12.0;  // tau
  double padding = 6.0;            // p
  double match_radius = 12.0;      // endpoint-to-anchor radius for graph extraction
  double epsilon = 1e-8;
  Rect canvas{0, 0, 800, 600};     // used when no plan supplies one
  WeightSet weights;

  void validate() const;
};

// Reads a JSON config; absent keys keep their defaults. Throws FormatError.
VerifierConfig load_verifier_config(std::string_view json_text);

struct ExecResult {
  bool valid = false;
  std::optional<SvgScene> scene;
  std::vector<std::string> diagnostics;
};

// Valid iff the text parses, every element's geometry resolves and, when an oracle is
// given, the oracle renders it in time. The oracle's boxes replace the builtin ones.
ExecResult check_exec(std::string_view svg_text, const FontModel& font = FontModel::builtin(),
                      GeometryOracle* oracle = nullptr);

struct ElementBox {
  std::size_t element_index = 0;
  ElementKind kind = ElementKind::other;
  Rect bbox;
};

struct TextPlacement {
  std::size_t element_index = 0;
  std::string content;
  std::optional<std::string> container_node_id;  // empty when no container could be assigned
  std::optional<Rect> container;
  TextBox box;
};

struct ConnectorGeometry {
  std::size_t element_index = 0;
  Endpoints ends;
};

// Everything the reward terms need, in global coordinates.
struct GeometryReport {
  std::vector<ElementBox> element_bboxes;
  std::vector<TextPlacement> text_boxes;
  std::vector<ConnectorGeometry> connector_endpoints;  // document order
  std::set<Edge> extracted_edges;
  Rect all_bbox;
  bool render_valid = false;
};

GeometryReport extract_geometry(const SvgScene& scene, const LayoutPlan& plan, const VerifierConfig& cfg);

struct FitResult {
  double fit = 0.0;
  double overflow = 0.0;
};
FitResult fit_and_overflow(const GeometryReport& report, const Rect& canvas, double epsilon);

// Per-endpoint outcome; `distance` is empty when the rendered connector is missing.
struct EndpointScore {
  std::optional<double> distance;
  double diagonal = 0.0;
  bool hit = false;
  double clamped_error = 1.0;  // min(distance / diagonal, 1); 1 when missing
};

struct AnchorResult {
  double acc = 1.0;
  double err = 0.0;
  std::vector<EndpointScore> endpoints;  // 2 per plan connector: start, end
  std::size_t missing_connectors = 0;
};
AnchorResult anchor_rewards(const GeometryReport& report, const LayoutPlan& plan, const VerifierConfig& cfg);

struct TextScore {
  bool inside = false;
  bool violation = true;
  std::optional<double> margin;  // empty for unmatched text
};

struct TextResult {
  double in_box = 1.0;
  double padding = 0.0;
  std::vector<TextScore> texts;
  std::size_t unmatched = 0;
};
TextResult text_rewards(const GeometryReport& report, const LayoutPlan& plan, const VerifierConfig& cfg);

std::set<Edge> extract_graph(const GeometryReport& report, const LayoutPlan& plan, const VerifierConfig& cfg);
double graph_reward(const std::set<Edge>& predicted, const std::set<Edge>& truth, double epsilon);

bool is_semantic_primitive(ElementKind kind);
double clean_reward(const SvgScene& scene, double epsilon);

struct RewardBreakdown {
  double exec = 0.0;
  double fit = 0.0;
  double overflow = 0.0;
  double anchor_acc = 0.0;
  double anchor_err = 0.0;
  double text_in_box = 0.0;
  double padding = 0.0;
  double graph = 0.0;
  double clean = 0.0;
  WeightSet weights;
  double total = 0.0;
  std::vector<std::string> diagnostics;
};

nlohmann::json breakdown_to_json(const RewardBreakdown& r);

double total_reward(const RewardBreakdown& components, const WeightSet& weights);

// Canvas-fit and overflow weights ramp from 0 (before update 500) to full (from update 1000).
double curriculum_ramp(long update_index);
WeightSet curriculum_weights(const WeightSet& base, long update_index);

// Full pipeline for one candidate against its reference plan. `weights` defaults to cfg.weights.
RewardBreakdown verify(std::string_view svg_text, const LayoutPlan& plan, const VerifierConfig& cfg,
                       const std::optional<WeightSet>& weights = std::nullopt,
                       const FontModel& font = FontModel::builtin(), GeometryOracle* oracle = nullptr);

}  // namespace geosvg
