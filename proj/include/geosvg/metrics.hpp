#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "geosvg/corpus.hpp"
#include "geosvg/verifier.hpp"

namespace geosvg {

class GeometryOracle;

struct PredictionPair {
  std::string sample_id;
  const CorpusSample* reference = nullptr;
  std::string candidate_svg;
};

// Per-sample counts feeding the ten metrics. Distance-type fields are empty when the candidate
// failed to render.
struct SampleRecord {
  std::string sample_id;
  bool rendered = false;
  bool fits = false;
  std::optional<double> overflow_ratio;  // outside area / union area
  std::size_t elements_total = 0;
  std::size_t elements_inside = 0;
  std::size_t endpoints_total = 0;
  std::size_t endpoints_hit = 0;
  std::optional<double> endpoint_error_sum;  // sum of unclamped distance / diagonal
  std::size_t texts_total = 0;
  std::size_t texts_inside = 0;
  std::optional<std::size_t> texts_violating;
  std::set<Edge> predicted_edges;
  std::set<Edge> truth_edges;
  double edge_f1 = 0.0;
  double clean = 0.0;
};

SampleRecord evaluate_pair(const PredictionPair& pair, const VerifierConfig& cfg,
                           const FontModel& font = FontModel::builtin(), GeometryOracle* oracle = nullptr);

// Percentages except AEE, which is a plain ratio. Empty optionals mean no sample defined the metric.
struct MetricsReport {
  double rsr = 0;
  double gfr = 0;
  std::optional<double> oar;
  double eicr = 0;
  double aacc = 0;
  std::optional<double> aee;
  double tbr = 0;
  std::optional<double> tpvr;
  double ef1 = 0;
  double clean = 0;
  std::size_t n_samples = 0;
  std::size_t n_elements = 0;
  std::size_t n_endpoints = 0;
  std::size_t n_texts = 0;
};

// Throws EmptyInput for an empty list.
MetricsReport aggregate(const std::vector<SampleRecord>& records);

enum class ReportFormat { json, csv, md };
std::optional<ReportFormat> parse_report_format(std::string_view s);
std::string emit_report(const MetricsReport& report, ReportFormat format);

using OracleFactory = std::function<std::unique_ptr<GeometryOracle>()>;

// Scores <pred_dir>/<sample_id>.svg against every reference in `corpus_dir`. A missing
// prediction counts as a render failure.
std::vector<SampleRecord> evaluate_directory(const std::filesystem::path& corpus_dir,
                                             const std::filesystem::path& pred_dir, const VerifierConfig& cfg,
                                             int workers = 8, const FontModel& font = FontModel::builtin(),
                                             const OracleFactory& oracle_factory = {});

}  // namespace geosvg
