#include "geosvg/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "geosvg/errors.hpp"
#include "geosvg/format.hpp"
#include "geosvg/render_oracle.hpp"

namespace geosvg {

using nlohmann::json;

namespace {

std::size_t labeled_nodes(const LayoutPlan& plan) {
  return static_cast<std::size_t>(
      std::count_if(plan.nodes.begin(), plan.nodes.end(), [](const NodeSpec& n) { return !n.label.empty(); }));
}

std::set<Edge> edge_set(const LayoutPlan& plan) { return {plan.edges.begin(), plan.edges.end()}; }

double percent(std::size_t num, std::size_t den, double vacuous) {
  return den == 0 ? vacuous : 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

SampleRecord evaluate_pair(const PredictionPair& pair, const VerifierConfig& cfg, const FontModel& font,
                           GeometryOracle* oracle) {
  if (pair.reference == nullptr) throw ReferenceMismatch(pair.sample_id + ": no reference sample");
  const CorpusSample& ref = *pair.reference;
  if (pair.sample_id != ref.sample_id) {
    throw ReferenceMismatch("prediction '" + pair.sample_id + "' paired with reference '" + ref.sample_id + "'");
  }
  const LayoutPlan& plan = ref.plan;
  SampleRecord rec;
  rec.sample_id = pair.sample_id;
  rec.truth_edges = edge_set(plan);

  const ExecResult exec = check_exec(pair.candidate_svg, font, oracle);
  if (!exec.valid) {
    // Failed renders score zero on every success metric, over the reference's instance counts.
    rec.elements_total = plan.nodes.size() + labeled_nodes(plan) + plan.connectors.size();
    rec.endpoints_total = 2 * plan.connectors.size();
    rec.texts_total = labeled_nodes(plan);
    return rec;
  }

  const GeometryReport report = extract_geometry(*exec.scene, plan, cfg);
  rec.rendered = true;
  const FitResult fit = fit_and_overflow(report, plan.canvas, cfg.epsilon);
  rec.fits = fit.fit == 1.0;
  rec.overflow_ratio = -fit.overflow;

  rec.elements_total = report.element_bboxes.size();
  for (const ElementBox& e : report.element_bboxes) rec.elements_inside += plan.canvas.contains(e.bbox) ? 1 : 0;

  const AnchorResult anchors = anchor_rewards(report, plan, cfg);
  rec.endpoints_total = anchors.endpoints.size();
  double err = 0.0;
  for (const EndpointScore& s : anchors.endpoints) {
    rec.endpoints_hit += s.hit ? 1 : 0;
    if (s.distance && s.diagonal > 0) {
      err += *s.distance / s.diagonal;
    } else if (s.distance) {
      err += *s.distance > 0 ? 1.0 : 0.0;
    } else {
      err += 1.0;
    }
  }
  rec.endpoint_error_sum = err;

  const TextResult texts = text_rewards(report, plan, cfg);
  rec.texts_total = texts.texts.size();
  std::size_t violating = 0;
  for (const TextScore& t : texts.texts) {
    rec.texts_inside += t.inside ? 1 : 0;
    violating += t.violation ? 1 : 0;
  }
  rec.texts_violating = violating;

  rec.predicted_edges = report.extracted_edges;
  rec.edge_f1 = graph_reward(rec.predicted_edges, rec.truth_edges, cfg.epsilon);
  rec.clean = clean_reward(*exec.scene, cfg.epsilon);
  return rec;
}

MetricsReport aggregate(const std::vector<SampleRecord>& records) {
  if (records.empty()) throw EmptyInput("no records to aggregate");
  MetricsReport r;
  r.n_samples = records.size();
  std::size_t rendered = 0, fits = 0, oar_n = 0;
  std::size_t el_in = 0, ep_hit = 0, tx_in = 0;
  std::size_t aee_n = 0, tp_n = 0, tp_viol = 0;
  double oar_sum = 0, aee_sum = 0, f1_sum = 0, clean_sum = 0;
  for (const SampleRecord& s : records) {
    rendered += s.rendered ? 1 : 0;
    fits += s.fits ? 1 : 0;
    if (s.overflow_ratio) {
      oar_sum += *s.overflow_ratio;
      ++oar_n;
    }
    r.n_elements += s.elements_total;
    el_in += s.elements_inside;
    r.n_endpoints += s.endpoints_total;
    ep_hit += s.endpoints_hit;
    if (s.endpoint_error_sum) {
      aee_sum += *s.endpoint_error_sum;
      aee_n += s.endpoints_total;
    }
    r.n_texts += s.texts_total;
    tx_in += s.texts_inside;
    if (s.texts_violating) {
      tp_viol += *s.texts_violating;
      tp_n += s.texts_total;
    }
    f1_sum += s.edge_f1;
    clean_sum += s.clean;
  }
  const double n = static_cast<double>(records.size());
  const double vacuous = rendered > 0 ? 100.0 : 0.0;
  r.rsr = 100.0 * static_cast<double>(rendered) / n;
  r.gfr = 100.0 * static_cast<double>(fits) / n;
  if (oar_n > 0) r.oar = 100.0 * oar_sum / static_cast<double>(oar_n);
  r.eicr = percent(el_in, r.n_elements, vacuous);
  r.aacc = percent(ep_hit, r.n_endpoints, vacuous);
  if (aee_n > 0) r.aee = aee_sum / static_cast<double>(aee_n);
  else if (rendered > 0) r.aee = 0.0;
  r.tbr = percent(tx_in, r.n_texts, vacuous);
  if (tp_n > 0) r.tpvr = 100.0 * static_cast<double>(tp_viol) / static_cast<double>(tp_n);
  else if (rendered > 0) r.tpvr = 0.0;
  r.ef1 = 100.0 * f1_sum / n;
  r.clean = 100.0 * clean_sum / n;
  return r;
}

std::optional<ReportFormat> parse_report_format(std::string_view s) {
  if (s == "json") return ReportFormat::json;
  if (s == "csv") return ReportFormat::csv;
  if (s == "md") return ReportFormat::md;
  return std::nullopt;
}

std::string emit_report(const MetricsReport& r, ReportFormat format) {
  struct Column {
    const char* name;
    std::optional<double> value;
    bool percent;
  };
  const Column cols[] = {{"RSR", r.rsr, true},   {"GFR", r.gfr, true},   {"OAR", r.oar, true},
                         {"EICR", r.eicr, true}, {"AAcc", r.aacc, true}, {"AEE", r.aee, false},
                         {"TBR", r.tbr, true},   {"TPVR", r.tpvr, true}, {"E-F1", r.ef1, true},
                         {"Clean", r.clean, true}};
  const std::pair<const char*, std::size_t> counts[] = {
      {"n_samples", r.n_samples}, {"n_elements", r.n_elements}, {"n_endpoints", r.n_endpoints}, {"n_texts", r.n_texts}};
  std::ostringstream out;
  switch (format) {
    case ReportFormat::json: {
      json doc = json::object();
      for (const Column& c : cols) doc[c.name] = c.value ? json(*c.value) : json(nullptr);
      for (const auto& [k, v] : counts) doc[k] = v;
      out << doc.dump(2) << '\n';
      break;
    }
    case ReportFormat::csv: {
      std::string header, row;
      for (const Column& c : cols) {
        header += std::string(c.name) + ",";
        row += (c.value ? format_number(*c.value) : std::string()) + ",";
      }
      for (const auto& [k, v] : counts) {
        header += std::string(k) + ",";
        row += std::to_string(v) + ",";
      }
      header.pop_back();
      row.pop_back();
      out << header << '\n' << row << '\n';
      break;
    }
    case ReportFormat::md: {
      std::string header = "|", rule = "|", row = "|";
      for (const Column& c : cols) {
        header += " " + std::string(c.name) + " |";
        rule += " ---: |";
        std::string cell = "n/a";
        if (c.value) {
          char buf[32];
          std::snprintf(buf, sizeof buf, c.percent ? "%.1f" : "%.3f", *c.value);
          cell = buf;
        }
        row += " " + cell + " |";
      }
      out << header << '\n' << rule << '\n' << row << '\n';
      break;
    }
  }
  return out.str();
}

std::vector<SampleRecord> evaluate_directory(const std::filesystem::path& corpus_dir,
                                             const std::filesystem::path& pred_dir, const VerifierConfig& cfg,
                                             int workers, const FontModel& font, const OracleFactory& oracle_factory) {
  const std::vector<CorpusSample> refs = load_split(corpus_dir);
  if (refs.empty()) throw EmptyInput("no reference samples in " + corpus_dir.string());
  std::error_code ec;
  if (!std::filesystem::is_directory(pred_dir, ec)) throw IoError("not a directory: " + pred_dir.string());

  std::vector<SampleRecord> records(refs.size());
  const std::size_t threads = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), 1, refs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  const auto work = [&]() {
    std::unique_ptr<GeometryOracle> oracle = oracle_factory ? oracle_factory() : nullptr;
    for (std::size_t i = next++; i < refs.size(); i = next++) {
      try {
        const std::filesystem::path p = pred_dir / (refs[i].sample_id + ".svg");
        std::string svg;
        if (std::filesystem::exists(p)) svg = read_file(p);
        records[i] = evaluate_pair({refs[i].sample_id, &refs[i], std::move(svg)}, cfg, font, oracle.get());
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        next = refs.size();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return records;
}

}  // namespace geosvg
