#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "geosvg/plan.hpp"

namespace geosvg {

enum class FamilyKind {
  horizontal_pipeline,
  stacked_modules,
  branching_flow,
  grouped_containers,
  retrieval_architecture,
  multistage_workflow,
};

inline constexpr FamilyKind kAllFamilies[] = {
    FamilyKind::horizontal_pipeline,   FamilyKind::stacked_modules,        FamilyKind::branching_flow,
    FamilyKind::grouped_containers,    FamilyKind::retrieval_architecture, FamilyKind::multistage_workflow,
};

std::string_view to_string(FamilyKind f);
std::optional<FamilyKind> parse_family(std::string_view s);

enum class SplitName { train, validation, iid_test, template_held_out, complexity_held_out };

inline constexpr SplitName kAllSplits[] = {SplitName::train, SplitName::validation, SplitName::iid_test,
                                           SplitName::template_held_out, SplitName::complexity_held_out};

std::string_view to_string(SplitName s);
std::optional<SplitName> parse_split(std::string_view s);

struct IntRange {
  int lo = 0;
  int hi = 0;
  bool contains(int v) const { return v >= lo && v <= hi; }
  friend bool operator==(const IntRange&, const IntRange&) = default;
};

// Generation parameters of one split. `defaults()` reproduces the published complexity table.
struct SplitSpec {
  SplitName name = SplitName::train;
  int count = 0;
  IntRange node_range{3, 7};
  IntRange edge_range{2, 8};
  std::vector<Rect> canvas_options;
  std::vector<double> node_weights;  // one weight per value in node_range
  IntRange extra_edges{0, 0};        // random forward edges added on top of the template
  std::vector<double> extra_edge_weights;  // one weight per value in extra_edges; uniform when empty
  bool held_out_templates = false;

  static SplitSpec defaults(SplitName name);
  void validate() const;
};

enum class CorruptionKind { box_shift, endpoint_shift, text_shrink_box, canvas_overflow };

std::string_view to_string(CorruptionKind k);
std::optional<CorruptionKind> parse_corruption(std::string_view s);

// `target` indexes plan.connectors for endpoint_shift and plan.nodes otherwise.
struct CorruptionTag {
  CorruptionKind kind = CorruptionKind::box_shift;
  double magnitude = 0.0;
  std::size_t target = 0;

  friend bool operator==(const CorruptionTag&, const CorruptionTag&) = default;
};

struct DiagramStats {
  int nodes = 0;  // box nodes; containers are counted in `groups`
  int edges = 0;
  int text_boxes = 0;
  int branches = 0;  // nodes with out-degree >= 2
  int groups = 0;

  friend bool operator==(const DiagramStats&, const DiagramStats&) = default;
};

DiagramStats compute_stats(const LayoutPlan& plan);

// Geometric ground truth derived from a plan and its emitter style.
struct GeoMetadata {
  std::string family;
  std::string template_name;
  std::uint64_t seed = 0;
  double font_size = 16;
  nlohmann::json doc;  // canvas, nodes, text_regions, anchors, edges, stats

  friend bool operator==(const GeoMetadata& a, const GeoMetadata& b) {
    return a.family == b.family && a.template_name == b.template_name && a.seed == b.seed &&
           a.font_size == b.font_size && a.doc == b.doc;
  }
};

GeoMetadata compute_metadata(const LayoutPlan& plan, FamilyKind family, std::string_view template_name,
                             std::uint64_t seed, double font_size);
nlohmann::json metadata_to_json(const GeoMetadata& m);
GeoMetadata metadata_from_json(const nlohmann::json& doc);

struct CorpusSample {
  std::string sample_id;
  std::string prompt;
  LayoutPlan plan;
  std::string svg;
  GeoMetadata metadata;
  std::optional<CorruptionTag> corruption;
  FamilyKind family = FamilyKind::horizontal_pipeline;
  std::uint64_t seed = 0;

  StyleConfig style() const;
};

// Deterministic in (family, split, seed). Throws InfeasibleLayout if no placement fits.
CorpusSample generate_sample(FamilyKind family, const SplitSpec& split, std::uint64_t seed);

// Renders the intended plan with the given defects; tags with magnitude 0 are no-ops.
// Throws TargetMissing for an out-of-range or non-box target.
std::string render_with_defects(const CorpusSample& sample, const std::vector<CorruptionTag>& defects,
                                std::uint64_t seed);

// Replaces the SVG with a defective rendering; plan and metadata stay the intended reference.
CorpusSample corrupt_sample(const CorpusSample& sample, const CorruptionTag& tag, std::uint64_t seed);

struct CorpusConfig {
  double scale = 1.0;
  std::uint64_t seed = 13;
  int workers = 8;
  std::vector<SplitSpec> splits;  // defaults() of every split when empty
  std::set<SplitName> fixed_counts;  // splits whose count is taken as given instead of scaled

  // Published split sizes (train/validation/iid/template/complexity) in a fixed 24:2:2:1:1 ratio.
  static int base_count(SplitName s);
  static int scaled_count(SplitName s, double scale);
  std::vector<SplitSpec> resolved_splits() const;
};

CorpusConfig load_corpus_config(std::string_view json_text);

struct SplitManifest {
  SplitName name = SplitName::train;
  int count = 0;
  std::uint64_t seed_base = 0;
  std::string checksum;  // SHA-256 over every sample file in sample order
  double mean_nodes = 0;
  double mean_edges = 0;
  double mean_text_boxes = 0;
  double mean_branches = 0;
  double mean_groups = 0;
  IntRange nodes_seen;
  IntRange edges_seen;
};

struct CorpusManifest {
  std::filesystem::path root;
  double scale = 1.0;
  std::uint64_t seed = 13;
  std::vector<SplitManifest> splits;

  const SplitManifest& split(SplitName s) const;
};

nlohmann::json manifest_to_json(const CorpusManifest& m);
CorpusManifest load_manifest(const std::filesystem::path& root);

// Seed of sample `index` in `split`; disjoint across splits by construction.
std::uint64_t sample_seed(std::uint64_t corpus_seed, SplitName split, std::uint64_t index);
std::string sample_stem(SplitName split, std::size_t index);

std::vector<CorpusSample> generate_split(const SplitSpec& spec, std::uint64_t corpus_seed, int workers = 1);

// Writes <root>/<split>/<stem>.{prompt.txt,plan,svg,meta} and <root>/manifest.json.
CorpusManifest build_corpus(const CorpusConfig& config, const std::filesystem::path& root);

void write_sample(const CorpusSample& sample, const std::filesystem::path& dir);
CorpusSample load_sample(const std::filesystem::path& dir, std::string_view stem);
// Samples of a split directory sorted by stem; the first `limit` only when limit > 0.
std::vector<CorpusSample> load_split(const std::filesystem::path& dir, std::size_t limit = 0);

}  // namespace geosvg
