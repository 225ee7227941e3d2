#include "geosvg/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "geosvg/errors.hpp"
#include "geosvg/render_oracle.hpp"

namespace geosvg {

using nlohmann::json;

json weights_to_json(const WeightSet& w) {
  return {{"exec", w.exec},     {"fit", w.fit},         {"overflow", w.overflow}, {"anchor", w.anchor},
          {"text", w.text},     {"padding", w.padding}, {"graph", w.graph},       {"clean", w.clean}};
}

WeightSet weights_from_json(const json& doc, WeightSet w) {
  if (!doc.is_object()) throw FormatError("weights must be an object");
  const auto read = [&](const char* key, double& slot) {
    if (!doc.contains(key)) return;
    if (!doc[key].is_number()) throw FormatError(std::string("weights.") + key + " must be a number");
    slot = doc[key].get<double>();
    if (slot < 0) throw FormatError(std::string("weights.") + key + " must be non-negative");
  };
  read("exec", w.exec);
  read("fit", w.fit);
  read("overflow", w.overflow);
  read("anchor", w.anchor);
  read("text", w.text);
  read("padding", w.padding);
  read("graph", w.graph);
  read("clean", w.clean);
  for (const auto& [k, v] : doc.items()) {
    static const std::set<std::string> known = {"exec", "fit", "overflow", "anchor", "text", "padding", "graph", "clean"};
    if (!known.contains(k)) throw FormatError("unknown weight '" + k + "'");
  }
  return w;
}

void VerifierConfig::validate() const {
  if (!(anchor_threshold > 0)) throw FormatError("anchor threshold must be positive");
  if (!(padding >= 0)) throw FormatError("padding must be non-negative");
  if (!(match_radius > 0)) throw FormatError("match radius must be positive");
  if (!(epsilon > 0)) throw FormatError("epsilon must be positive");
  if (!(canvas.w > 0 && canvas.h > 0)) throw FormatError("canvas must have positive size");
}

VerifierConfig load_verifier_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("verifier config: ") + e.what());
  }
  if (!doc.is_object()) throw FormatError("verifier config must be an object");
  VerifierConfig cfg;
  const auto num = [&](const char* key, double& slot) {
    if (!doc.contains(key)) return;
    if (!doc[key].is_number()) throw FormatError(std::string("verifier config: '") + key + "' must be a number");
    slot = doc[key].get<double>();
  };
  num("anchor_threshold", cfg.anchor_threshold);
  num("padding", cfg.padding);
  num("match_radius", cfg.match_radius);
  num("epsilon", cfg.epsilon);
  if (doc.contains("canvas")) {
    const json& c = doc["canvas"];
    if (!c.is_object() || !c.contains("width") || !c.contains("height")) {
      throw FormatError("verifier config: canvas needs width and height");
    }
    cfg.canvas = {0, 0, c["width"].get<double>(), c["height"].get<double>()};
  }
  if (doc.contains("weights")) cfg.weights = weights_from_json(doc["weights"], cfg.weights);
  cfg.validate();
  return cfg;
}

ExecResult check_exec(std::string_view svg_text, const FontModel& font, GeometryOracle* oracle) {
  ExecResult result;
  try {
    result.scene = parse_svg(svg_text, font);
  } catch (const Error& e) {
    result.diagnostics.emplace_back(e.what());
    return result;
  }
  result.diagnostics = result.scene->diagnostics();
  if (!result.scene->geometry_ok()) return result;

  if (oracle != nullptr) {
    MeasureRequest req{"exec", std::string(svg_text), result.scene->canvas_width, result.scene->canvas_height, 5000};
    const MeasureResponse resp = oracle->measure(req);
    if (!resp.ok) {
      result.diagnostics.push_back("renderer: " + (resp.error.empty() ? std::string("failed") : resp.error));
      return result;
    }
    std::string reason;
    if (!apply_measurement(*result.scene, resp, &reason)) {
      result.diagnostics.push_back("renderer: " + reason);
      return result;
    }
  }
  result.valid = true;
  return result;
}

namespace {

struct Container {
  Rect shape;
  Point plan_center;
};

// Rendered shape standing for each plan node: the rect tagged node-<id> when present, else the
// closed shape whose center is nearest the planned box center, else the planned box itself.
std::vector<Container> resolve_containers(const SvgScene& scene, const LayoutPlan& plan) {
  std::vector<const SvgElement*> shapes;
  for (const SvgElement& e : scene.elements) {
    if (!e.has_geometry()) continue;
    if (e.kind == ElementKind::rect || e.kind == ElementKind::circle || e.kind == ElementKind::ellipse ||
        e.kind == ElementKind::polygon) {
      shapes.push_back(&e);
    }
  }
  std::vector<Container> out;
  out.reserve(plan.nodes.size());
  for (const NodeSpec& n : plan.nodes) {
    const Point c = n.bbox.center();
    const SvgElement* best = nullptr;
    const std::string tag = "node-" + n.id;
    for (const SvgElement* s : shapes) {
      if (s->elem_id == tag) {
        best = s;
        break;
      }
    }
    if (best == nullptr) {
      double best_d = std::numeric_limits<double>::infinity();
      for (const SvgElement* s : shapes) {
        const double d = distance(s->global_bbox.center(), c);
        if (d < best_d) {
          best_d = d;
          best = s;
        }
      }
    }
    out.push_back({best ? best->global_bbox : n.bbox, c});
  }
  return out;
}

std::optional<std::size_t> assign_container(const std::string& text, const Rect& box, const LayoutPlan& plan) {
  std::optional<std::size_t> best;
  double best_d = std::numeric_limits<double>::infinity();
  const Point tc = box.center();
  const auto consider = [&](bool label_only) {
    for (std::size_t i = 0; i < plan.nodes.size(); ++i) {
      if (label_only && plan.nodes[i].label != text) continue;
      const double d = distance(plan.nodes[i].bbox.center(), tc);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
  };
  consider(true);
  if (!best) consider(false);
  return best;
}

// Nearest plan node having an anchor within `radius` of p; earlier nodes win ties.
std::optional<std::size_t> match_node(Point p, const LayoutPlan& plan, double radius) {
  std::optional<std::size_t> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < plan.nodes.size(); ++i) {
    for (AnchorKind k : kAllAnchors) {
      const double d = distance(p, anchor_point(plan.nodes[i], k));
      if (d <= radius && d < best_d) {
        best_d = d;
        best = i;
      }
    }
  }
  return best;
}

}  // namespace

GeometryReport extract_geometry(const SvgScene& scene, const LayoutPlan& plan, const VerifierConfig& cfg) {
  GeometryReport report;
  report.render_valid = scene.geometry_ok();
  const std::vector<Container> containers = resolve_containers(scene, plan);
  std::vector<Rect> boxes;
  for (std::size_t i = 0; i < scene.elements.size(); ++i) {
    const SvgElement& e = scene.elements[i];
    if (!e.has_geometry()) continue;
    report.element_bboxes.push_back({i, e.kind, e.global_bbox});
    boxes.push_back(e.global_bbox);
    if (e.kind == ElementKind::text && e.text_box) {
      TextPlacement t{i, e.text_content.value_or(""), std::nullopt, std::nullopt, *e.text_box};
      if (const auto node = assign_container(t.content, t.box.bbox, plan)) {
        t.container_node_id = plan.nodes[*node].id;
        t.container = containers[*node].shape;
      }
      report.text_boxes.push_back(std::move(t));
    }
    if (e.is_connector() && e.endpoints) report.connector_endpoints.push_back({i, *e.endpoints});
  }
  report.all_bbox = boxes.empty() ? Rect{} : union_bbox(boxes);
  report.extracted_edges = extract_graph(report, plan, cfg);
  return report;
}

FitResult fit_and_overflow(const GeometryReport& report, const Rect& canvas, double epsilon) {
  const Rect& all = report.all_bbox;
  FitResult r;
  r.fit = canvas.contains(all) ? 1.0 : 0.0;
  const double outside = area_outside(all, canvas);
  r.overflow = outside > 0 ? std::clamp(-outside / (all.area() + epsilon), -1.0, 0.0) : 0.0;
  return r;
}

AnchorResult anchor_rewards(const GeometryReport& report, const LayoutPlan& plan, const VerifierConfig& cfg) {
  AnchorResult r;
  const std::size_t m = 2 * plan.connectors.size();
  if (m == 0) return r;
  double hits = 0.0;
  double err = 0.0;
  for (std::size_t k = 0; k < plan.connectors.size(); ++k) {
    const ConnectorSpec& c = plan.connectors[k];
    const NodeSpec& src = plan.node(c.src_id);
    const NodeSpec& dst = plan.node(c.dst_id);
    const bool present = k < report.connector_endpoints.size();
    if (!present) ++r.missing_connectors;
    for (int side = 0; side < 2; ++side) {
      const NodeSpec& node = side == 0 ? src : dst;
      const Point target = anchor_point(node, side == 0 ? c.src_anchor : c.dst_anchor);
      EndpointScore s;
      s.diagonal = node.bbox.diagonal();
      if (present) {
        const Endpoints& ends = report.connector_endpoints[k].ends;
        const double d = distance(side == 0 ? ends.start : ends.end, target);
        s.distance = d;
        s.hit = d <= cfg.anchor_threshold;
        s.clamped_error = s.diagonal > 0 ? std::min(d / s.diagonal, 1.0) : (d > 0 ? 1.0 : 0.0);
      }
      hits += s.hit ? 1.0 : 0.0;
      err += s.clamped_error;
      r.endpoints.push_back(s);
    }
  }
  r.acc = hits / static_cast<double>(m);
  r.err = -err / static_cast<double>(m);
  return r;
}

TextResult text_rewards(const GeometryReport& report, const LayoutPlan& /*plan*/, const VerifierConfig& cfg) {
  TextResult r;
  if (report.text_boxes.empty()) return r;
  double inside = 0.0;
  double violations = 0.0;
  for (const TextPlacement& t : report.text_boxes) {
    TextScore s;
    if (t.container) {
      const Rect& b = *t.container;
      const Rect& tb = t.box.bbox;
      const double margin = std::min({tb.left() - b.left(), tb.top() - b.top(), b.right() - tb.right(), b.bottom() - tb.bottom()});
      s.margin = margin;
      s.inside = b.contains(tb);
      s.violation = margin < cfg.padding;
    } else {
      ++r.unmatched;
    }
    inside += s.inside ? 1.0 : 0.0;
    violations += s.violation ? 1.0 : 0.0;
    r.texts.push_back(s);
  }
  const double k = static_cast<double>(report.text_boxes.size());
  r.in_box = inside / k;
  r.padding = -violations / k;
  return r;
}

std::set<Edge> extract_graph(const GeometryReport& report, const LayoutPlan& plan, const VerifierConfig& cfg) {
  std::set<Edge> edges;
  for (const ConnectorGeometry& c : report.connector_endpoints) {
    const auto u = match_node(c.ends.start, plan, cfg.match_radius);
    const auto v = match_node(c.ends.end, plan, cfg.match_radius);
    if (u && v) edges.emplace(plan.nodes[*u].id, plan.nodes[*v].id);
  }
  return edges;
}

double graph_reward(const std::set<Edge>& predicted, const std::set<Edge>& truth, double epsilon) {
  if (predicted.empty() && truth.empty()) return 1.0;
  if (predicted.empty() || truth.empty()) return 0.0;
  double common = 0.0;
  for (const Edge& e : predicted) common += truth.contains(e) ? 1.0 : 0.0;
  const double p = common / static_cast<double>(predicted.size());
  const double r = common / static_cast<double>(truth.size());
  // epsilon only guards the degenerate P + R = 0 case, so a perfect match scores exactly 1.
  const double denom = p + r;
  return 2 * p * r / (denom > 0 ? denom : epsilon);
}

bool is_semantic_primitive(ElementKind kind) {
  switch (kind) {
    case ElementKind::rect:
    case ElementKind::text:
    case ElementKind::line:
    case ElementKind::polyline:
    case ElementKind::circle:
    case ElementKind::ellipse: return true;
    default: return false;
  }
}

double clean_reward(const SvgScene& scene, double epsilon) {
  double semantic = 0.0;
  double total = 0.0;
  for (const SvgElement& e : scene.elements) {
    if (e.kind == ElementKind::group) continue;
    total += 1.0;
    semantic += is_semantic_primitive(e.kind) ? 1.0 : 0.0;
  }
  return semantic / (total > 0 ? total : epsilon);
}

double total_reward(const RewardBreakdown& c, const WeightSet& w) {
  if (c.exec <= 0) return 0.0;
  double total = w.exec * c.exec;
  total += w.fit * c.fit;
  total += w.overflow * c.overflow;
  total += w.anchor * (c.anchor_acc + c.anchor_err);
  total += w.text * c.text_in_box;
  total += w.padding * c.padding;
  total += w.graph * c.graph;
  total += w.clean * c.clean;
  return total;
}

double curriculum_ramp(long u) {
  if (u < 500) return 0.0;
  if (u >= 1000) return 1.0;
  return static_cast<double>(u - 500) / 500.0;
}

WeightSet curriculum_weights(const WeightSet& base, long update_index) {
  WeightSet w = base;
  const double ramp = curriculum_ramp(update_index);
  w.fit *= ramp;
  w.overflow *= ramp;
  return w;
}

json breakdown_to_json(const RewardBreakdown& r) {
  return {{"components",
           {{"exec", r.exec},
            {"fit", r.fit},
            {"overflow", r.overflow},
            {"anchor_acc", r.anchor_acc},
            {"anchor_err", r.anchor_err},
            {"text_in_box", r.text_in_box},
            {"padding", r.padding},
            {"graph", r.graph},
            {"clean", r.clean}}},
          {"weights", weights_to_json(r.weights)},
          {"total", r.total},
          {"diagnostics", r.diagnostics}};
}

RewardBreakdown verify(std::string_view svg_text, const LayoutPlan& plan, const VerifierConfig& cfg,
                       const std::optional<WeightSet>& weights, const FontModel& font, GeometryOracle* oracle) {
  RewardBreakdown r;
  r.weights = weights.value_or(cfg.weights);
  ExecResult exec = check_exec(svg_text, font, oracle);
  r.diagnostics = exec.diagnostics;
  if (!exec.valid) {
    // Worst value of every term; the gate zeroes the total regardless.
    r.overflow = -1.0;
    r.anchor_err = -1.0;
    r.padding = -1.0;
    r.total = 0.0;
    return r;
  }
  const GeometryReport report = extract_geometry(*exec.scene, plan, cfg);
  r.exec = 1.0;
  const FitResult fit = fit_and_overflow(report, plan.canvas, cfg.epsilon);
  r.fit = fit.fit;
  r.overflow = fit.overflow;
  const AnchorResult anchors = anchor_rewards(report, plan, cfg);
  r.anchor_acc = anchors.acc;
  r.anchor_err = anchors.err;
  if (anchors.missing_connectors > 0) {
    r.diagnostics.push_back(std::to_string(anchors.missing_connectors) + " planned connector(s) not rendered");
  }
  const TextResult text = text_rewards(report, plan, cfg);
  r.text_in_box = text.in_box;
  r.padding = text.padding;
  const std::vector<Edge> truth_list = plan.edges;
  r.graph = graph_reward(report.extracted_edges, std::set<Edge>(truth_list.begin(), truth_list.end()), cfg.epsilon);
  r.clean = clean_reward(*exec.scene, cfg.epsilon);
  r.total = total_reward(r, r.weights);
  return r;
}

}  // namespace geosvg
