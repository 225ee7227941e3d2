#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include <json.hpp>
#include <unistd.h>

#include "geosvg/errors.hpp"
#include "geosvg/format.hpp"
#include "geosvg/metrics.hpp"

using namespace geosvg;
namespace fs = std::filesystem;

namespace {

CorpusSample chain_with(std::size_t connectors) {
  const SplitSpec spec = SplitSpec::defaults(SplitName::train);
  for (std::uint64_t seed = 0;; ++seed) {
    CorpusSample s = generate_sample(FamilyKind::horizontal_pipeline, spec, seed);
    if (s.plan.connectors.size() == connectors && s.metadata.template_name == "chain") {
      s.sample_id = "s" + std::to_string(seed);
      return s;
    }
  }
}

std::vector<CorpusSample> references(std::size_t n) {
  std::vector<CorpusSample> out;
  const SplitSpec spec = SplitSpec::defaults(SplitName::iid_test);
  for (std::size_t i = 0; i < n; ++i) {
    CorpusSample s = generate_sample(kAllFamilies[i % 6], spec, 500 + i);
    s.sample_id = "r" + std::to_string(i);
    out.push_back(std::move(s));
  }
  return out;
}

void expect_perfect(const MetricsReport& r) {
  EXPECT_EQ(r.rsr, 100);
  EXPECT_EQ(r.gfr, 100);
  EXPECT_EQ(r.oar, 0.0);
  EXPECT_EQ(r.eicr, 100);
  EXPECT_EQ(r.aacc, 100);
  EXPECT_EQ(r.aee, 0.0);
  EXPECT_EQ(r.tbr, 100);
  EXPECT_EQ(r.tpvr, 0.0);
  EXPECT_EQ(r.ef1, 100);
  EXPECT_EQ(r.clean, 100);
}

}  // namespace

TEST(EvaluatePair, GroundTruthIsPerfect) {
  const CorpusSample s = chain_with(3);
  const SampleRecord rec = evaluate_pair({s.sample_id, &s, s.svg}, {});
  EXPECT_TRUE(rec.rendered);
  EXPECT_TRUE(rec.fits);
  EXPECT_EQ(rec.overflow_ratio, 0.0);
  EXPECT_EQ(rec.elements_inside, rec.elements_total);
  EXPECT_EQ(rec.endpoints_hit, 6u);
  EXPECT_EQ(rec.endpoint_error_sum, 0.0);
  EXPECT_EQ(rec.edge_f1, 1.0);
  expect_perfect(aggregate({rec}));
}

TEST(EvaluatePair, ShiftedEndpointCostsAnchorAndEdge) {
  const CorpusSample s = chain_with(3);
  const std::string svg = render_with_defects(s, {{CorruptionKind::endpoint_shift, 20, 0}}, 1);
  const SampleRecord rec = evaluate_pair({s.sample_id, &s, svg}, {});
  EXPECT_EQ(rec.endpoints_total, 6u);
  EXPECT_EQ(rec.endpoints_hit, 5u);
  EXPECT_NEAR(rec.edge_f1, 0.8, 1e-8);
  const MetricsReport r = aggregate({rec});
  EXPECT_NEAR(r.aacc, 100.0 * 5 / 6, 1e-9);
  EXPECT_NEAR(r.ef1, 80, 1e-6);
}

TEST(EvaluatePair, UnparseableCandidate) {
  const CorpusSample s = chain_with(3);
  const SampleRecord rec = evaluate_pair({s.sample_id, &s, "<svg><rect"}, {});
  EXPECT_FALSE(rec.rendered);
  EXPECT_FALSE(rec.overflow_ratio);
  EXPECT_FALSE(rec.endpoint_error_sum);
  EXPECT_FALSE(rec.texts_violating);
  const MetricsReport r = aggregate({rec});
  EXPECT_EQ(r.rsr, 0);
  EXPECT_EQ(r.gfr, 0);
  EXPECT_EQ(r.eicr, 0);
  EXPECT_EQ(r.aacc, 0);
  EXPECT_EQ(r.tbr, 0);
  EXPECT_EQ(r.ef1, 0);
  EXPECT_EQ(r.clean, 0);
  EXPECT_FALSE(r.oar);
  EXPECT_FALSE(r.aee);
  EXPECT_FALSE(r.tpvr);
  EXPECT_GT(r.n_endpoints, 0u);
}

TEST(EvaluatePair, MismatchedIdRejected) {
  const CorpusSample s = chain_with(2);
  EXPECT_THROW(evaluate_pair({"other", &s, s.svg}, {}), ReferenceMismatch);
  EXPECT_THROW(evaluate_pair({"x", nullptr, s.svg}, {}), ReferenceMismatch);
}

TEST(Aggregate, HalfFailing) {
  const std::vector<CorpusSample> refs = references(100);
  std::vector<SampleRecord> recs;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    recs.push_back(evaluate_pair({refs[i].sample_id, &refs[i], i < 50 ? refs[i].svg : std::string("not svg")}, {}));
  }
  const MetricsReport r = aggregate(recs);
  EXPECT_EQ(r.rsr, 50);
  EXPECT_EQ(r.oar, 0.0);
  EXPECT_EQ(r.aee, 0.0);
}

TEST(Aggregate, SelfEvaluationAndIdempotence) {
  const std::vector<CorpusSample> refs = references(60);
  std::vector<SampleRecord> recs;
  for (const CorpusSample& s : refs) recs.push_back(evaluate_pair({s.sample_id, &s, s.svg}, {}));
  expect_perfect(aggregate(recs));

  const CorpusSample s = chain_with(3);
  const SampleRecord one =
      evaluate_pair({s.sample_id, &s, render_with_defects(s, {{CorruptionKind::canvas_overflow, 30, 1}}, 2)}, {});
  const std::string single = emit_report(aggregate({one}), ReportFormat::json);
  const MetricsReport many = aggregate(std::vector<SampleRecord>(7, one));
  const MetricsReport base = aggregate({one});
  EXPECT_NEAR(many.rsr, base.rsr, 1e-12);
  EXPECT_NEAR(many.gfr, base.gfr, 1e-12);
  EXPECT_NEAR(*many.oar, *base.oar, 1e-12);
  EXPECT_NEAR(many.eicr, base.eicr, 1e-12);
  EXPECT_NEAR(many.aacc, base.aacc, 1e-12);
  EXPECT_NEAR(*many.aee, *base.aee, 1e-12);
  EXPECT_NEAR(many.ef1, base.ef1, 1e-12);
  EXPECT_GT(*base.oar, 0);
  EXPECT_LT(base.gfr, 100);
  EXPECT_FALSE(single.empty());
}

TEST(Aggregate, EmptyInputThrows) { EXPECT_THROW(aggregate({}), EmptyInput); }

TEST(Aggregate, AllFailingLeavesDistancesAbsent) {
  const std::vector<CorpusSample> refs = references(6);
  std::vector<SampleRecord> recs;
  for (const CorpusSample& s : refs) recs.push_back(evaluate_pair({s.sample_id, &s, ""}, {}));
  const MetricsReport r = aggregate(recs);
  EXPECT_EQ(r.rsr, 0);
  EXPECT_FALSE(r.oar);
  EXPECT_FALSE(r.aee);
  EXPECT_FALSE(r.tpvr);
  const nlohmann::json doc = nlohmann::json::parse(emit_report(r, ReportFormat::json));
  EXPECT_TRUE(doc["OAR"].is_null());
  EXPECT_NE(emit_report(r, ReportFormat::md).find("n/a"), std::string::npos);
}

TEST(Report, Bounds) {
  const std::vector<CorpusSample> refs = references(24);
  std::vector<SampleRecord> recs;
  const CorruptionKind kinds[] = {CorruptionKind::box_shift, CorruptionKind::endpoint_shift,
                                  CorruptionKind::text_shrink_box, CorruptionKind::canvas_overflow};
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const std::string svg = render_with_defects(refs[i], {{kinds[i % 4], 25.0 * (i % 5), 0}}, i);
    recs.push_back(evaluate_pair({refs[i].sample_id, &refs[i], svg}, {}));
  }
  const MetricsReport r = aggregate(recs);
  for (double v : {r.rsr, r.gfr, r.eicr, r.aacc, r.tbr, r.ef1, r.clean, *r.oar, *r.tpvr}) {
    EXPECT_GE(v, 0);
    EXPECT_LE(v, 100);
  }
  EXPECT_GE(*r.aee, 0);
}

TEST(Report, FormatsAgree) {
  MetricsReport r;
  r.rsr = 100;
  r.gfr = 87.5;
  r.oar = 1.25;
  r.eicr = 99;
  r.aacc = 83.33333333333333;
  r.aee = 0.0425;
  r.tbr = 100;
  r.tpvr = 0;
  r.ef1 = 80;
  r.clean = 100;
  r.n_samples = 8;

  const nlohmann::json doc = nlohmann::json::parse(emit_report(r, ReportFormat::json));
  std::istringstream csv(emit_report(r, ReportFormat::csv));
  std::string header, row;
  std::getline(csv, header);
  std::getline(csv, row);
  std::vector<std::string> names, values;
  for (std::istringstream h(header); std::getline(h, header, ',');) names.push_back(header);
  for (std::istringstream v(row); std::getline(v, row, ',');) values.push_back(row);
  ASSERT_EQ(names.size(), values.size());
  EXPECT_EQ(names[0], "RSR");
  EXPECT_EQ(names[9], "Clean");
  for (std::size_t i = 0; i < names.size(); ++i) EXPECT_EQ(doc[names[i]].get<double>(), std::stod(values[i])) << names[i];

  const std::string md = emit_report(r, ReportFormat::md);
  const std::string first = md.substr(0, md.find('\n'));
  EXPECT_EQ(std::count(first.begin(), first.end(), '|'), 11);
  EXPECT_EQ(first, "| RSR | GFR | OAR | EICR | AAcc | AEE | TBR | TPVR | E-F1 | Clean |");
  EXPECT_NE(md.find("| 83.3 |"), std::string::npos);
  EXPECT_EQ(emit_report(r, ReportFormat::md), md);
}

TEST(EvaluateDirectory, MissingPredictionCountsAsFailure) {
  const fs::path root = fs::temp_directory_path() / ("geosvg_eval_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root / "ref");
  fs::create_directories(root / "pred");
  const std::vector<CorpusSample> refs = references(4);
  for (const CorpusSample& s : refs) write_sample(s, root / "ref");
  for (std::size_t i = 0; i < 3; ++i) write_file_atomic(root / "pred" / (refs[i].sample_id + ".svg"), refs[i].svg);
  const std::vector<SampleRecord> recs = evaluate_directory(root / "ref", root / "pred", {}, 2);
  ASSERT_EQ(recs.size(), 4u);
  EXPECT_EQ(aggregate(recs).rsr, 75);
  fs::remove_all(root);
}
