#include "geosvg/corpus.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include "geosvg/errors.hpp"
#include "geosvg/format.hpp"
#include "geosvg/rng.hpp"
#include "geosvg/text_metrics.hpp"

namespace geosvg {

using nlohmann::json;

namespace {

constexpr double kMargin = 20;
constexpr double kGroupPad = 16;
constexpr double kMinBoxW = 48;
constexpr double kMinBoxH = 36;

struct FamilyInfo {
  FamilyKind kind;
  std::string_view name;
};

constexpr FamilyInfo kFamilyNames[] = {
    {FamilyKind::horizontal_pipeline, "horizontal_pipeline"},
    {FamilyKind::stacked_modules, "stacked_modules"},
    {FamilyKind::branching_flow, "branching_flow"},
    {FamilyKind::grouped_containers, "grouped_containers"},
    {FamilyKind::retrieval_architecture, "retrieval_architecture"},
    {FamilyKind::multistage_workflow, "multistage_workflow"},
};

constexpr std::string_view kSplitNames[] = {"train", "validation", "iid_test", "template_held_out",
                                            "complexity_held_out"};
constexpr int kSplitUnits[] = {24, 2, 2, 1, 1};

constexpr std::string_view kCorruptionNames[] = {"box_shift", "endpoint_shift", "text_shrink_box",
                                                 "canvas_overflow"};

std::size_t split_index(SplitName s) { return static_cast<std::size_t>(s); }
std::size_t family_index(FamilyKind f) { return static_cast<std::size_t>(f); }

double even_ceil(double v) { return 2 * std::ceil(v / 2 - 1e-9); }
double even_floor(double v) { return 2 * std::floor(v / 2); }

// ---------------------------------------------------------------------------------------------
// Graph templates

struct TNode {
  std::string role;  // retrieval roles; empty for generic labels
  int layer = 0;
  int slot = 0;
};

struct TGroup {
  int first = 0;
  int last = 0;
};

struct GraphTemplate {
  std::string name;
  bool vertical = false;
  std::vector<TNode> nodes;
  std::vector<std::pair<int, int>> edges;
  std::vector<TGroup> groups;
  std::size_t structural_edges = 0;  // edges that keep the template connected; extras follow

  int add(int layer, std::string role = {}) {
    nodes.push_back({std::move(role), layer, 0});
    return static_cast<int>(nodes.size()) - 1;
  }
  bool has_link(int u, int v) const {
    return std::any_of(edges.begin(), edges.end(), [&](const auto& e) {
      return (e.first == u && e.second == v) || (e.first == v && e.second == u);
    });
  }
  void link(int u, int v) {
    if (u != v && !has_link(u, v)) edges.emplace_back(u, v);
  }
  int layers() const {
    int m = 0;
    for (const TNode& n : nodes) m = std::max(m, n.layer + 1);
    return m;
  }
  void assign_slots() {
    std::map<int, int> next;
    for (TNode& n : nodes) n.slot = next[n.layer]++;
  }
};

GraphTemplate chain(std::string name, int k, bool vertical) {
  GraphTemplate t;
  t.name = std::move(name);
  t.vertical = vertical;
  for (int i = 0; i < k; ++i) t.add(i);
  for (int i = 0; i + 1 < k; ++i) t.link(i, i + 1);
  return t;
}

void add_skip(GraphTemplate& t, Rng& rng) {
  const int k = static_cast<int>(t.nodes.size());
  if (k < 3) return;
  const int u = rng.uniform_int(0, k - 3);
  t.link(u, u + 2);
}

// One or two groups over contiguous layer ranges.
void add_groups(GraphTemplate& t, Rng& rng, int count) {
  const int layers = t.layers();
  if (count <= 0 || layers < 2) return;
  if (count >= 2 && layers >= 2) {
    const int s = rng.uniform_int(1, layers - 1);
    t.groups.push_back({0, s - 1});
    t.groups.push_back({s, layers - 1});
    return;
  }
  const int len = rng.uniform_int(std::min(2, layers), std::max(2, layers - 1));
  const int start = rng.uniform_int(0, layers - len);
  t.groups.push_back({start, start + len - 1});
}

GraphTemplate pipeline_template(int k, bool held_out, Rng& rng) {
  GraphTemplate t = chain(held_out ? "chain_skip" : "chain", k, false);
  t.structural_edges = t.edges.size();
  if (held_out) add_skip(t, rng);
  return t;
}

GraphTemplate stacked_template(int k, bool held_out, Rng& rng) {
  GraphTemplate t;
  if (!held_out) {
    t = chain("stack", k, true);
    t.structural_edges = t.edges.size();
    if (rng.bernoulli(0.3)) add_skip(t, rng);
  } else {
    t.name = "stack_parallel";
    t.vertical = true;
    const int layers = k - 1;
    const int wide = rng.uniform_int(1, layers - 1);
    std::vector<std::vector<int>> by_layer(static_cast<std::size_t>(layers));
    for (int l = 0; l < layers; ++l) {
      by_layer[l].push_back(t.add(l));
      if (l == wide) by_layer[l].push_back(t.add(l));
    }
    for (int l = 0; l + 1 < layers; ++l) {
      for (int u : by_layer[l]) {
        for (int v : by_layer[l + 1]) t.link(u, v);
      }
    }
    t.structural_edges = t.edges.size();
  }
  if (t.layers() >= 3 && rng.bernoulli(0.5)) add_groups(t, rng, 1);
  return t;
}

GraphTemplate branching_template(int k, bool held_out, Rng& rng) {
  GraphTemplate t;
  t.vertical = false;
  if (held_out) {
    t.name = "fork_tree";
    for (int i = 0; i < k; ++i) {
      int layer = 0;
      for (int j = i + 1; j > 1; j /= 2) ++layer;
      t.add(layer);
    }
    for (int i = 1; i < k; ++i) t.link((i - 1) / 2, i);
    t.structural_edges = t.edges.size();
    return t;
  }
  if (k == 3) {
    t.name = "fork";
    t.add(0);
    t.add(1);
    t.add(1);
    t.link(0, 1);
    t.link(0, 2);
    t.structural_edges = t.edges.size();
    return t;
  }
  t.name = "fork_merge";
  const int pre = rng.uniform_int(0, k - 4);
  const int post = k - 4 - pre;
  int layer = 0;
  int prev = -1;
  for (int i = 0; i < pre; ++i) {
    const int n = t.add(layer++);
    if (prev >= 0) t.link(prev, n);
    prev = n;
  }
  const int root = t.add(layer++);
  if (prev >= 0) t.link(prev, root);
  const int a = t.add(layer);
  const int b = t.add(layer++);
  const int merge = t.add(layer++);
  t.link(root, a);
  t.link(root, b);
  t.link(a, merge);
  t.link(b, merge);
  prev = merge;
  for (int i = 0; i < post; ++i) {
    const int n = t.add(layer++);
    t.link(prev, n);
    prev = n;
  }
  t.structural_edges = t.edges.size();
  return t;
}

GraphTemplate grouped_template(int k, bool held_out, Rng& rng) {
  GraphTemplate t;
  if (!held_out) {
    t = chain("grouped_chain", k, false);
    t.structural_edges = t.edges.size();
    add_groups(t, rng, rng.uniform_int(1, 2));
    if (rng.bernoulli(0.3)) add_skip(t, rng);
    return t;
  }
  t.name = "grouped_fanout";
  const int fan = std::min(k - 2, 3);
  const int post = k - 2 - fan;
  const int root = t.add(0);
  std::vector<int> mids;
  for (int i = 0; i < fan; ++i) mids.push_back(t.add(1));
  const int sink = t.add(2);
  for (int m : mids) t.link(root, m);
  for (int m : mids) t.link(m, sink);
  int prev = sink;
  for (int i = 0; i < post; ++i) {
    const int n = t.add(3 + i);
    t.link(prev, n);
    prev = n;
  }
  t.groups.push_back({1, 1});
  t.structural_edges = t.edges.size();
  return t;
}

GraphTemplate retrieval_template(int k, bool held_out, Rng& /*rng*/) {
  GraphTemplate t;
  t.vertical = false;
  if (!held_out) {
    t.name = "rag";
    std::vector<std::string> roles = {"query", "retriever", "store", "ranker", "generator"};
    if (k >= 6) roles.insert(roles.begin() + 1, "embedder");
    if (k >= 7) roles.push_back("output");
    roles.resize(std::min<std::size_t>(roles.size(), static_cast<std::size_t>(k)));
    while (static_cast<int>(roles.size()) < k) roles.emplace_back();
    for (int i = 0; i < k; ++i) t.add(i, roles[i]);
    for (int i = 0; i + 1 < k; ++i) t.link(i, i + 1);
    t.structural_edges = t.edges.size();
    // Feedback between the store and the stage it serves: ranker when present, else retriever.
    const auto find = [&](std::string_view role) {
      for (int i = 0; i < k; ++i) {
        if (t.nodes[i].role == role) return i;
      }
      return -1;
    };
    const int store = find("store");
    const int ranker = find("ranker");
    if (ranker >= 0) {
      t.edges.emplace_back(ranker, store);
    } else {
      t.edges.emplace_back(store, find("retriever"));
    }
    return t;
  }
  t.name = "rag_dual";
  const int q = t.add(0, "query");
  const int r1 = t.add(1, "retriever");
  const int r2 = t.add(1, "retriever2");
  t.link(q, r1);
  t.link(q, r2);
  std::vector<std::string> tail = {"store", "generator"};
  if (k >= 6) tail.insert(tail.begin() + 1, "ranker");
  if (k >= 7) tail.push_back("output");
  int layer = 2;
  std::vector<int> prev = {r1, r2};
  for (int i = 3; i < k; ++i) {
    const std::size_t ti = static_cast<std::size_t>(i - 3);
    const int n = t.add(layer++, ti < tail.size() ? tail[ti] : std::string());
    for (int p : prev) t.link(p, n);
    prev = {n};
  }
  t.structural_edges = t.edges.size();
  return t;
}

GraphTemplate multistage_template(int k, bool held_out, Rng& rng) {
  GraphTemplate t;
  if (!held_out) {
    t = chain("stages", k, false);
    t.structural_edges = t.edges.size();
    add_groups(t, rng, rng.uniform_int(1, 2));
    if (rng.bernoulli(0.5)) {
      const int v = rng.uniform_int(1, k - 1);
      const int u = rng.uniform_int(0, v - 1);
      t.edges.emplace_back(v, u);
    }
    return t;
  }
  t.name = "stages_branch";
  // A chain in which one stage runs two nodes in parallel.
  const int layers = k - 1;
  const int wide = rng.uniform_int(1, std::max(1, layers - 2));
  std::vector<std::vector<int>> by_layer(static_cast<std::size_t>(layers));
  for (int l = 0; l < layers; ++l) {
    by_layer[l].push_back(t.add(l));
    if (l == wide) by_layer[l].push_back(t.add(l));
  }
  for (int l = 0; l + 1 < layers; ++l) {
    for (int u : by_layer[l]) {
      for (int v : by_layer[l + 1]) t.link(u, v);
    }
  }
  t.structural_edges = t.edges.size();
  t.groups.push_back({wide, wide});
  return t;
}

GraphTemplate make_template(FamilyKind family, int k, bool held_out, Rng& rng) {
  switch (family) {
    case FamilyKind::horizontal_pipeline: return pipeline_template(k, held_out, rng);
    case FamilyKind::stacked_modules: return stacked_template(k, held_out, rng);
    case FamilyKind::branching_flow: return branching_template(k, held_out, rng);
    case FamilyKind::grouped_containers: return grouped_template(k, held_out, rng);
    case FamilyKind::retrieval_architecture: return retrieval_template(k, held_out, rng);
    case FamilyKind::multistage_workflow: return multistage_template(k, held_out, rng);
  }
  return chain("chain", k, false);
}

// Adds random forward edges until `count` were added or no candidate is left.
void add_forward_edges(GraphTemplate& t, Rng& rng, int count) {
  std::vector<std::pair<int, int>> candidates;
  const int k = static_cast<int>(t.nodes.size());
  for (int u = 0; u < k; ++u) {
    for (int v = 0; v < k; ++v) {
      if (t.nodes[u].layer < t.nodes[v].layer && !t.has_link(u, v)) candidates.emplace_back(u, v);
    }
  }
  rng.shuffle(candidates);
  for (int i = 0; i < count && i < static_cast<int>(candidates.size()); ++i) t.edges.push_back(candidates[i]);
}

void clamp_edges(GraphTemplate& t, Rng& rng, const IntRange& range) {
  while (static_cast<int>(t.edges.size()) > range.hi && t.edges.size() > t.structural_edges) t.edges.pop_back();
  const int missing = range.lo - static_cast<int>(t.edges.size());
  if (missing > 0) add_forward_edges(t, rng, missing);
}

// ---------------------------------------------------------------------------------------------
// Labels

const std::vector<std::string_view> kGeneralLabels = {
    "Encoder",     "Decoder",      "Tokenizer",   "Embedding",  "Attention",   "Feature Net", "Classifier",
    "Normalizer",  "Scheduler",    "Data Loader", "Augmenter",  "Validator",   "Aggregator",  "Projector",
    "Transformer", "Parser",       "Planner",     "Optimizer",  "Evaluator",   "Monitor",     "Dispatcher",
    "Renderer",    "Sampler",      "Predictor",   "Controller", "Batcher",     "Gateway",     "Compressor",
    "Indexer",     "Detector",     "Segmenter",   "Tracker",    "Extractor",   "Summarizer",  "Translator",
    "Input",       "Embed",        "Cache",       "Merge",      "Rank",        "Fuse",        "Pool",
    "Norm",        "Head",         "Output",      "Filter",     "Router",      "Gate",        "Logits",
    "Loss",        "Tokens",       "Mixer",       "Proj",       "Attn",        "MLP",         "Sink",
    "Buffer",      "Queue",        "Reward",      "Policy",     "Critic",      "Actor",       "Memory",
};

const std::map<std::string_view, std::vector<std::string_view>> kRoleLabels = {
    {"query", {"Query", "User Query", "Question", "Prompt"}},
    {"embedder", {"Embedder", "Query Encoder", "Embed"}},
    {"retriever", {"Retriever", "Dense Retriever", "Search"}},
    {"retriever2", {"Sparse Retriever", "Keyword Search", "BM25"}},
    {"store", {"Vector Store", "Doc Store", "Index", "Corpus DB"}},
    {"ranker", {"Reranker", "Ranker", "Cross Encoder"}},
    {"generator", {"Generator", "LLM", "Reader"}},
    {"output", {"Answer", "Response", "Result"}},
};

const std::vector<std::string_view> kGroupCaptions = {"Backbone", "Frontend", "Backend",  "Training", "Inference",
                                                      "Preprocess", "Offline", "Online", "Core",    "Services"};

std::string pick_label(const std::vector<std::string_view>& pool, Rng& rng, std::size_t max_len,
                       const std::vector<std::string>& used) {
  std::vector<std::string_view> fit;
  for (std::string_view s : pool) {
    if ((max_len == 0 || s.size() <= max_len) &&
        std::find(used.begin(), used.end(), std::string(s)) == used.end()) {
      fit.push_back(s);
    }
  }
  if (fit.empty()) return {};
  return std::string(fit[rng.index(fit.size())]);
}

struct Labels {
  std::vector<std::string> nodes;
  std::vector<std::string> groups;
};

Labels assign_labels(const GraphTemplate& t, FamilyKind family, Rng& rng, std::size_t max_len) {
  Labels out;
  std::vector<std::string> used;
  for (const TNode& n : t.nodes) {
    std::string label;
    if (const auto it = kRoleLabels.find(n.role); !n.role.empty() && it != kRoleLabels.end()) {
      label = pick_label(it->second, rng, max_len, used);
    }
    if (label.empty()) label = pick_label(kGeneralLabels, rng, max_len, used);
    if (label.empty()) label = "N" + std::to_string(used.size() + 1);
    used.push_back(label);
    out.nodes.push_back(label);
  }
  for (std::size_t g = 0; g < t.groups.size(); ++g) {
    std::string caption;
    if (family == FamilyKind::multistage_workflow) {
      caption = "Stage " + std::to_string(g + 1);
    } else {
      caption = pick_label(kGroupCaptions, rng, max_len, used);
      if (caption.empty()) caption = "G" + std::to_string(g + 1);
    }
    used.push_back(caption);
    out.groups.push_back(caption);
  }
  return out;
}

// ---------------------------------------------------------------------------------------------
// Layered layout

std::pair<AnchorKind, AnchorKind> route(const GraphTemplate& t, int u, int v) {
  const TNode& a = t.nodes[u];
  const TNode& b = t.nodes[v];
  if (!t.vertical) {
    if (b.layer == a.layer + 1) return {AnchorKind::right_center, AnchorKind::left_center};
    if (b.layer > a.layer) return {AnchorKind::top_center, AnchorKind::top_center};
    if (b.layer < a.layer) return {AnchorKind::bottom_center, AnchorKind::bottom_center};
    return a.slot < b.slot ? std::pair{AnchorKind::bottom_center, AnchorKind::top_center}
                           : std::pair{AnchorKind::top_center, AnchorKind::bottom_center};
  }
  if (b.layer == a.layer + 1) return {AnchorKind::bottom_center, AnchorKind::top_center};
  if (b.layer > a.layer) return {AnchorKind::left_center, AnchorKind::left_center};
  if (b.layer < a.layer) return {AnchorKind::right_center, AnchorKind::right_center};
  return a.slot < b.slot ? std::pair{AnchorKind::right_center, AnchorKind::left_center}
                         : std::pair{AnchorKind::left_center, AnchorKind::right_center};
}

std::optional<LayoutPlan> layout(const GraphTemplate& t, const Labels& labels, double font, const Rect& canvas) {
  const int layers = t.layers();
  const std::size_t k = t.nodes.size();
  const double box_h = std::max(kMinBoxH, even_ceil(font + 2 * kLabelInset));
  const double header = font + kLabelInset;
  std::vector<double> box_w(k);
  for (std::size_t i = 0; i < k; ++i) {
    box_w[i] = std::max(kMinBoxW, even_ceil(text_width(labels.nodes[i], font) + 2 * kLabelInset));
  }
  std::vector<int> layer_size(static_cast<std::size_t>(layers), 0);
  for (const TNode& n : t.nodes) ++layer_size[n.layer];

  const auto starts = [&](int l) {
    return std::count_if(t.groups.begin(), t.groups.end(), [&](const TGroup& g) { return g.first == l; });
  };
  const auto ends = [&](int l) {
    return std::count_if(t.groups.begin(), t.groups.end(), [&](const TGroup& g) { return g.last == l; });
  };

  // Main-axis extent of each layer and the gap after it.
  std::vector<double> extent(static_cast<std::size_t>(layers), box_h);
  std::vector<double> gap(static_cast<std::size_t>(std::max(0, layers - 1)));
  for (int l = 0; l + 1 < layers; ++l) {
    if (!t.vertical) {
      gap[l] = std::max(40.0, 24 + kGroupPad * static_cast<double>(ends(l) + starts(l + 1)));
    } else {
      gap[l] = std::max(28.0, 12 + kGroupPad * static_cast<double>(ends(l)) +
                                  (kGroupPad + header) * static_cast<double>(starts(l + 1)));
    }
  }
  if (!t.vertical) {
    std::fill(extent.begin(), extent.end(), 0.0);
    for (std::size_t i = 0; i < k; ++i) extent[t.nodes[i].layer] = std::max(extent[t.nodes[i].layer], box_w[i]);
    for (std::size_t g = 0; g < t.groups.size(); ++g) {
      const TGroup& grp = t.groups[g];
      double have = 2 * kGroupPad;
      for (int l = grp.first; l <= grp.last; ++l) have += extent[l] + (l < grp.last ? gap[l] : 0);
      const double need = even_ceil(text_width(labels.groups[g], font) + 2 * kLabelInset);
      if (need > have) extent[grp.first] += even_ceil(need - have);
    }
  }

  std::vector<Rect> boxes(k);
  std::vector<Rect> groups(t.groups.size());
  const auto place = [&]() {
    std::vector<double> pos(static_cast<std::size_t>(layers), 0.0);
    for (int l = 1; l < layers; ++l) pos[l] = pos[l - 1] + extent[l - 1] + gap[l - 1];
    std::vector<double> cross_total(static_cast<std::size_t>(layers), 0.0);
    for (std::size_t i = 0; i < k; ++i) {
      const int l = t.nodes[i].layer;
      cross_total[l] += t.vertical ? box_w[i] : box_h;
    }
    for (int l = 0; l < layers; ++l) cross_total[l] += (layer_size[l] - 1) * (t.vertical ? 40.0 : 24.0);
    std::vector<double> cursor(static_cast<std::size_t>(layers));
    for (int l = 0; l < layers; ++l) cursor[l] = -cross_total[l] / 2;
    for (std::size_t i = 0; i < k; ++i) {
      const int l = t.nodes[i].layer;
      if (!t.vertical) {
        boxes[i] = {pos[l] + (extent[l] - box_w[i]) / 2, cursor[l], box_w[i], box_h};
        cursor[l] += box_h + 24;
      } else {
        boxes[i] = {cursor[l], pos[l], box_w[i], box_h};
        cursor[l] += box_w[i] + 40;
      }
    }
    for (std::size_t g = 0; g < t.groups.size(); ++g) {
      const TGroup& grp = t.groups[g];
      std::vector<Rect> members;
      for (std::size_t i = 0; i < k; ++i) {
        if (t.nodes[i].layer >= grp.first && t.nodes[i].layer <= grp.last) members.push_back(boxes[i]);
      }
      const Rect m = union_bbox(members);
      Rect r;
      if (!t.vertical) {
        const double x0 = pos[grp.first] - kGroupPad;
        const double x1 = pos[grp.last] + extent[grp.last] + kGroupPad;
        r = Rect::from_corners({x0, m.top() - kGroupPad - header}, {x1, m.bottom() + kGroupPad});
      } else {
        r = Rect::from_corners({m.left() - kGroupPad, m.top() - kGroupPad - header},
                               {m.right() + kGroupPad, m.bottom() + kGroupPad});
        const double need = even_ceil(text_width(labels.groups[g], font) + 2 * kLabelInset);
        if (need > r.w) {
          const double grow = even_ceil(need - r.w);
          r.x -= grow / 2;
          r.w += grow;
        }
      }
      groups[g] = r;
    }
    std::vector<Rect> all(boxes);
    all.insert(all.end(), groups.begin(), groups.end());
    return union_bbox(all);
  };

  Rect span = place();
  const double avail_main = (t.vertical ? canvas.h : canvas.w) - 2 * kMargin;
  const double avail_cross = (t.vertical ? canvas.w : canvas.h) - 2 * kMargin;
  const double main_len = t.vertical ? span.h : span.w;
  const double cross_len = t.vertical ? span.w : span.h;
  if (main_len > avail_main || cross_len > avail_cross) return std::nullopt;
  if (layers > 1) {
    const double extra = std::min(50.0, even_floor((avail_main - main_len) / (layers - 1)));
    if (extra > 0) {
      for (double& g : gap) g += extra;
      span = place();
    }
  }

  const double dx = std::floor((canvas.w - span.w) / 2) - span.x;
  const double dy = std::floor((canvas.h - span.h) / 2) - span.y;
  LayoutPlan plan;
  plan.canvas = {0, 0, canvas.w, canvas.h};
  for (std::size_t i = 0; i < k; ++i) {
    Rect b = boxes[i];
    b.x += dx;
    b.y += dy;
    plan.nodes.push_back({"n" + std::to_string(i), NodeType::box, b, labels.nodes[i]});
  }
  for (std::size_t g = 0; g < groups.size(); ++g) {
    Rect r = groups[g];
    r.x += dx;
    r.y += dy;
    plan.nodes.push_back({"g" + std::to_string(g), NodeType::group, r, labels.groups[g]});
  }
  for (const auto& [u, v] : t.edges) {
    const auto [sa, da] = route(t, u, v);
    plan.connectors.push_back({plan.nodes[u].id, plan.nodes[v].id, sa, da});
  }
  plan.edges = plan.connector_edges();
  return plan;
}

// ---------------------------------------------------------------------------------------------
// Prompts

std::string fill(std::string text, const std::map<std::string, std::string>& slots) {
  for (const auto& [key, value] : slots) {
    const std::string token = "{" + key + "}";
    for (std::size_t at = text.find(token); at != std::string::npos; at = text.find(token, at + value.size())) {
      text.replace(at, token.size(), value);
    }
  }
  return text;
}

const std::map<FamilyKind, std::vector<std::string_view>> kIntros = {
    {FamilyKind::horizontal_pipeline,
     {"Draw a {order} pipeline with {k} {stage}s.",
      "Create a linear processing diagram of {k} {stage}s arranged {order}.",
      "Sketch a {k}-{stage} data pipeline laid out {order}."}},
    {FamilyKind::stacked_modules,
     {"Draw a stack of {k} modules arranged {order}.",
      "Create a layered architecture diagram with {k} {stage}s stacked {order}.",
      "Sketch {k} stacked {stage}s connected {order}."}},
    {FamilyKind::branching_flow,
     {"Draw a branching flow with {k} {stage}s read {order}.",
      "Create a diagram where the flow splits into parallel {stage}s, {k} boxes in total, {order}.",
      "Sketch a {k}-node fork diagram laid out {order}."}},
    {FamilyKind::grouped_containers,
     {"Draw {k} {stage}s arranged {order}, with related {stage}s grouped in labeled containers.",
      "Create a diagram of {k} boxes inside grouped containers, flowing {order}.",
      "Sketch a grouped architecture with {k} {stage}s read {order}."}},
    {FamilyKind::retrieval_architecture,
     {"Draw a retrieval-augmented generation architecture with {k} components, {order}.",
      "Create a retrieval system diagram of {k} {stage}s arranged {order}.",
      "Sketch a {k}-component retrieval pipeline flowing {order}."}},
    {FamilyKind::multistage_workflow,
     {"Draw a multi-stage workflow with {k} {stage}s laid out {order}.",
      "Create a staged process diagram of {k} {stage}s grouped into phases, {order}.",
      "Sketch a {k}-{stage} workflow with labeled stages, read {order}."}},
};

const std::vector<std::string_view> kStageWords = {"stage", "step", "block", "module", "component"};
const std::vector<std::string_view> kVerbs = {"feeds into", "passes its output to", "connects to", "sends data to",
                                              "flows into"};

std::string make_prompt(FamilyKind family, const LayoutPlan& plan, bool vertical, Rng& rng) {
  const DiagramStats stats = compute_stats(plan);
  const std::vector<std::string_view>& intros = kIntros.at(family);
  const std::string_view order =
      vertical ? (rng.bernoulli(0.5) ? "top-to-bottom" : "from top to bottom")
               : (rng.bernoulli(0.5) ? "left-to-right" : "from left to right");
  std::string out = fill(std::string(intros[rng.index(intros.size())]),
                         {{"k", std::to_string(stats.nodes)},
                          {"order", std::string(order)},
                          {"stage", std::string(kStageWords[rng.index(kStageWords.size())])}});
  std::string names;
  for (const NodeSpec& n : plan.nodes) {
    if (n.type != NodeType::box) continue;
    names += (names.empty() ? "" : ", ") + ("\"" + n.label + "\"");
  }
  out += " The boxes are " + names + ".";
  for (const Edge& e : plan.edges) {
    const std::string_view verb = kVerbs[rng.index(kVerbs.size())];
    out += " \"" + plan.node(e.first).label + "\" " + std::string(verb) + " \"" + plan.node(e.second).label + "\".";
  }
  for (const NodeSpec& n : plan.nodes) {
    if (n.type == NodeType::group) out += " Enclose a group labeled \"" + n.label + "\".";
  }
  out += " Fit the diagram on a " + format_number(plan.canvas.w) + "x" + format_number(plan.canvas.h) +
         " canvas, keep arrows attached to box sides and every label inside its box.";
  return out;
}

// ---------------------------------------------------------------------------------------------
// Serialization helpers

json rect_json(const Rect& r) { return {{"x", r.x}, {"y", r.y}, {"w", r.w}, {"h", r.h}}; }

json stats_json(const DiagramStats& s) {
  return {{"nodes", s.nodes}, {"edges", s.edges}, {"text_boxes", s.text_boxes}, {"branches", s.branches},
          {"groups", s.groups}};
}

json corruption_json(const std::optional<CorruptionTag>& tag) {
  if (!tag) return nullptr;
  return {{"kind", to_string(tag->kind)}, {"magnitude", tag->magnitude}, {"target", tag->target}};
}

std::optional<CorruptionTag> corruption_from_json(const json& j) {
  if (j.is_null()) return std::nullopt;
  const auto kind = parse_corruption(j.at("kind").get<std::string>());
  if (!kind) throw FormatError("unknown corruption kind");
  return CorruptionTag{*kind, j.at("magnitude").get<double>(), j.at("target").get<std::size_t>()};
}

std::vector<std::pair<std::string, std::string>> sample_files(const CorpusSample& s) {
  json meta = metadata_to_json(s.metadata);
  meta["sample_id"] = s.sample_id;
  meta["corruption"] = corruption_json(s.corruption);
  return {{".prompt.txt", s.prompt + "\n"}, {".plan", serialize_plan(s.plan)}, {".svg", s.svg},
          {".meta", meta.dump(2) + "\n"}};
}

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (ctx_ == nullptr || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) throw IoError("sha256 init failed");
  }
  ~Sha256() { EVP_MD_CTX_free(ctx_); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(std::string_view data) { EVP_DigestUpdate(ctx_, data.data(), data.size()); }
  std::string hex() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_, md, &len);
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
      out += kHex[md[i] >> 4];
      out += kHex[md[i] & 15];
    }
    return out;
  }

 private:
  EVP_MD_CTX* ctx_;
};

IntRange range_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2) throw FormatError(std::string(what) + " must be [lo, hi]");
  return {j[0].get<int>(), j[1].get<int>()};
}

Point outward_normal(AnchorKind k) {
  switch (k) {
    case AnchorKind::left_center: return {-1, 0};
    case AnchorKind::right_center: return {1, 0};
    case AnchorKind::top_center: return {0, -1};
    case AnchorKind::bottom_center: return {0, 1};
  }
  return {0, 0};
}

}  // namespace

// -------------------------------------------------------------------------------------------------

std::string_view to_string(FamilyKind f) { return kFamilyNames[family_index(f)].name; }

std::optional<FamilyKind> parse_family(std::string_view s) {
  for (const FamilyInfo& f : kFamilyNames) {
    if (f.name == s) return f.kind;
  }
  return std::nullopt;
}

std::string_view to_string(SplitName s) { return kSplitNames[split_index(s)]; }

std::optional<SplitName> parse_split(std::string_view s) {
  for (SplitName n : kAllSplits) {
    if (to_string(n) == s) return n;
  }
  return std::nullopt;
}

std::string_view to_string(CorruptionKind k) { return kCorruptionNames[static_cast<std::size_t>(k)]; }

std::optional<CorruptionKind> parse_corruption(std::string_view s) {
  for (std::size_t i = 0; i < std::size(kCorruptionNames); ++i) {
    if (kCorruptionNames[i] == s) return static_cast<CorruptionKind>(i);
  }
  return std::nullopt;
}

SplitSpec SplitSpec::defaults(SplitName name) {
  SplitSpec s;
  s.name = name;
  s.count = CorpusConfig::base_count(name);
  s.canvas_options = {{0, 0, 600, 400}, {0, 0, 800, 600}};
  s.node_weights = {0.1, 0.2, 0.3, 0.3, 0.1};
  switch (name) {
    case SplitName::train:
    case SplitName::iid_test: break;
    case SplitName::validation: s.node_weights = {0.1, 0.25, 0.3, 0.25, 0.1}; break;
    case SplitName::template_held_out:
      s.node_weights = {0.05, 0.2, 0.3, 0.3, 0.15};
      s.held_out_templates = true;
      break;
    case SplitName::complexity_held_out:
      s.node_range = {6, 10};
      s.edge_range = {6, 13};
      s.canvas_options = {{0, 0, 800, 600}, {0, 0, 1000, 700}};
      s.node_weights = {0.15, 0.3, 0.25, 0.2, 0.1};
      s.extra_edges = {1, 3};
      s.extra_edge_weights = {0.4, 0.4, 0.2};
      break;
  }
  return s;
}

void SplitSpec::validate() const {
  const std::string where = "splits." + std::string(to_string(name));
  if (count < 0) throw FormatError(where + ": count must be non-negative");
  if (node_range.lo < 3 || node_range.hi < node_range.lo) throw FormatError(where + ": bad node range");
  if (edge_range.lo < 0 || edge_range.hi < edge_range.lo) throw FormatError(where + ": bad edge range");
  if (canvas_options.empty()) throw FormatError(where + ": no canvas options");
  for (const Rect& c : canvas_options) {
    if (!(c.w > 0 && c.h > 0)) throw FormatError(where + ": canvas must have positive size");
  }
  if (!node_weights.empty() && node_weights.size() != static_cast<std::size_t>(node_range.hi - node_range.lo + 1)) {
    throw FormatError(where + ": node_weights must have one entry per node count");
  }
  if (extra_edges.lo < 0 || extra_edges.hi < extra_edges.lo) throw FormatError(where + ": bad extra edge range");
  if (!extra_edge_weights.empty() &&
      extra_edge_weights.size() != static_cast<std::size_t>(extra_edges.hi - extra_edges.lo + 1)) {
    throw FormatError(where + ": extra_edge_weights must have one entry per extra edge count");
  }
  for (double w : node_weights) {
    if (!(w >= 0)) throw FormatError(where + ": weights must be non-negative");
  }
}

DiagramStats compute_stats(const LayoutPlan& plan) {
  DiagramStats s;
  std::map<std::string, int> out_degree;
  for (const Edge& e : plan.edges) ++out_degree[e.first];
  for (const NodeSpec& n : plan.nodes) {
    if (n.type == NodeType::box) {
      ++s.nodes;
      if (out_degree[n.id] >= 2) ++s.branches;
    } else {
      ++s.groups;
    }
    if (!n.label.empty()) ++s.text_boxes;
  }
  s.edges = static_cast<int>(plan.edges.size());
  return s;
}

GeoMetadata compute_metadata(const LayoutPlan& plan, FamilyKind family, std::string_view template_name,
                             std::uint64_t seed, double font_size) {
  GeoMetadata m;
  m.family = std::string(to_string(family));
  m.template_name = std::string(template_name);
  m.seed = seed;
  m.font_size = font_size;
  json nodes = json::array();
  json texts = json::array();
  for (const NodeSpec& n : plan.nodes) {
    nodes.push_back({{"id", n.id}, {"node_type", to_string(n.type)}, {"bbox", rect_json(n.bbox)}, {"label", n.label}});
    if (n.label.empty()) continue;
    const double baseline =
        n.type == NodeType::group ? caption_baseline(n.bbox, font_size) : centered_baseline(n.bbox, font_size);
    const TextBox tb = measure_text(n.label, font_size, {n.bbox.x + n.bbox.w / 2, baseline}, TextAnchor::middle);
    texts.push_back({{"node", n.id}, {"bbox", rect_json(tb.bbox)}, {"baseline", baseline}});
  }
  json anchors = json::array();
  for (std::size_t i = 0; i < plan.connectors.size(); ++i) {
    const ConnectorSpec& c = plan.connectors[i];
    const Point a = anchor_point(plan.node(c.src_id), c.src_anchor);
    const Point b = anchor_point(plan.node(c.dst_id), c.dst_anchor);
    anchors.push_back({{"connector", i},
                       {"source", c.src_id},
                       {"target", c.dst_id},
                       {"start", {a.x, a.y}},
                       {"end", {b.x, b.y}}});
  }
  json edges = json::array();
  for (const Edge& e : plan.edges) edges.push_back({e.first, e.second});
  m.doc = {{"canvas", {{"width", plan.canvas.w}, {"height", plan.canvas.h}}},
           {"nodes", nodes},
           {"text_regions", texts},
           {"anchors", anchors},
           {"edges", edges},
           {"stats", stats_json(compute_stats(plan))}};
  return m;
}

json metadata_to_json(const GeoMetadata& m) {
  return {{"family", m.family}, {"template", m.template_name}, {"seed", m.seed}, {"font_size", m.font_size},
          {"geometry", m.doc}};
}

GeoMetadata metadata_from_json(const json& doc) {
  try {
    GeoMetadata m;
    m.family = doc.at("family").get<std::string>();
    m.template_name = doc.at("template").get<std::string>();
    m.seed = doc.at("seed").get<std::uint64_t>();
    m.font_size = doc.at("font_size").get<double>();
    m.doc = doc.at("geometry");
    return m;
  } catch (const json::exception& e) {
    throw FormatError(std::string("metadata: ") + e.what());
  }
}

StyleConfig CorpusSample::style() const {
  StyleConfig s;
  s.font_size = metadata.font_size;
  return s;
}

CorpusSample generate_sample(FamilyKind family, const SplitSpec& split, std::uint64_t seed) {
  split.validate();
  Rng rng(mix_seed({seed, family_index(family), split.held_out_templates ? 1u : 0u}));

  std::vector<double> node_weights = split.node_weights;
  if (node_weights.empty()) node_weights.assign(static_cast<std::size_t>(split.node_range.hi - split.node_range.lo + 1), 1.0);
  const int k = split.node_range.lo + static_cast<int>(rng.categorical(node_weights));

  GraphTemplate t = make_template(family, k, split.held_out_templates, rng);
  if (split.extra_edges.hi > 0) {
    std::vector<double> w = split.extra_edge_weights;
    if (w.empty()) w.assign(static_cast<std::size_t>(split.extra_edges.hi - split.extra_edges.lo + 1), 1.0);
    add_forward_edges(t, rng, split.extra_edges.lo + static_cast<int>(rng.categorical(w)));
  }
  clamp_edges(t, rng, split.edge_range);
  t.assign_slots();

  const int font0 = rng.uniform_int(12, 20);
  const std::size_t canvas0 = rng.index(split.canvas_options.size());
  std::vector<Rect> canvases = {split.canvas_options[canvas0]};
  for (std::size_t i = 0; i < split.canvas_options.size(); ++i) {
    if (i != canvas0) canvases.push_back(split.canvas_options[i]);
  }
  const std::uint64_t label_seed = rng.next();
  static constexpr std::size_t kMaxLen[] = {0, 12, 9, 7, 6, 5};

  for (std::size_t round = 0; round < std::size(kMaxLen); ++round) {
    Rng label_rng(mix_seed({label_seed, round}));
    const Labels labels = assign_labels(t, family, label_rng, kMaxLen[round]);
    for (const Rect& canvas : canvases) {
      for (int font = font0; font >= 12; font -= 2) {
        std::optional<LayoutPlan> plan = layout(t, labels, font, canvas);
        if (!plan) continue;
        CorpusSample s;
        s.family = family;
        s.seed = seed;
        s.plan = std::move(*plan);
        s.metadata = compute_metadata(s.plan, family, t.name, seed, font);
        s.svg = emit_svg(s.plan, s.style());
        s.prompt = make_prompt(family, s.plan, t.vertical, rng);
        return s;
      }
    }
  }
  throw InfeasibleLayout("no layout of " + std::to_string(k) + " nodes (" + t.name + ") fits any canvas option");
}

std::string render_with_defects(const CorpusSample& sample, const std::vector<CorruptionTag>& defects,
                                std::uint64_t seed) {
  const LayoutPlan& plan = sample.plan;
  SvgOverrides ov;
  const auto shape = [&](const NodeSpec& n) -> Rect& { return ov.shapes.try_emplace(n.id, n.bbox).first->second; };
  const auto ends = [&](std::size_t i) -> std::pair<Point, Point>& {
    const ConnectorSpec& c = plan.connectors[i];
    return ov.connectors
        .try_emplace(i, anchor_point(plan.node(c.src_id), c.src_anchor), anchor_point(plan.node(c.dst_id), c.dst_anchor))
        .first->second;
  };
  const auto box_target = [&](const CorruptionTag& tag) -> const NodeSpec& {
    if (tag.target >= plan.nodes.size() || plan.nodes[tag.target].type != NodeType::box) {
      throw TargetMissing("corruption target node " + std::to_string(tag.target) + " is not a box");
    }
    return plan.nodes[tag.target];
  };
  const auto translate = [&](const NodeSpec& n, Point d) {
    Rect& r = shape(n);
    r.x += d.x;
    r.y += d.y;
    Point& off = ov.label_offsets.try_emplace(n.id, Point{0, 0}).first->second;
    off.x += d.x;
    off.y += d.y;
    for (std::size_t i = 0; i < plan.connectors.size(); ++i) {
      if (plan.connectors[i].src_id == n.id) {
        ends(i).first.x += d.x;
        ends(i).first.y += d.y;
      }
      if (plan.connectors[i].dst_id == n.id) {
        ends(i).second.x += d.x;
        ends(i).second.y += d.y;
      }
    }
  };

  for (std::size_t t = 0; t < defects.size(); ++t) {
    const CorruptionTag& tag = defects[t];
    if (!std::isfinite(tag.magnitude) || tag.magnitude < 0) {
      throw SchemaError("magnitude", "corruption magnitude must be a non-negative number");
    }
    if (tag.kind == CorruptionKind::endpoint_shift) {
      if (tag.target >= plan.connectors.size()) {
        throw TargetMissing("corruption target connector " + std::to_string(tag.target) + " does not exist");
      }
    } else {
      box_target(tag);
    }
    if (tag.magnitude == 0) continue;
    switch (tag.kind) {
      case CorruptionKind::box_shift: {
        static constexpr Point kDirs[] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
        Rng r(mix_seed({seed, tag.target, t}));
        const Point d = kDirs[r.index(4)];
        translate(box_target(tag), {d.x * tag.magnitude, d.y * tag.magnitude});
        break;
      }
      case CorruptionKind::canvas_overflow: {
        const NodeSpec& n = box_target(tag);
        const double dx = plan.canvas.w + tag.magnitude - shape(n).right();
        translate(n, {dx, 0});
        break;
      }
      case CorruptionKind::text_shrink_box: {
        Rect& r = shape(box_target(tag));
        const double s = std::min(tag.magnitude, (r.w - 1) / 2);
        r.x += s;
        r.w -= 2 * s;
        break;
      }
      case CorruptionKind::endpoint_shift: {
        const Point n = outward_normal(plan.connectors[tag.target].dst_anchor);
        Point& end = ends(tag.target).second;
        end.x += n.x * tag.magnitude;
        end.y += n.y * tag.magnitude;
        break;
      }
    }
  }
  return emit_svg(plan, sample.style(), ov);
}

CorpusSample corrupt_sample(const CorpusSample& sample, const CorruptionTag& tag, std::uint64_t seed) {
  if (sample.corruption) throw SchemaError("corruption", "sample is already corrupted");
  if (!(tag.magnitude > 0) || !std::isfinite(tag.magnitude)) {
    throw SchemaError("magnitude", "corruption magnitude must be positive");
  }
  CorpusSample out = sample;
  out.svg = render_with_defects(sample, {tag}, seed);
  out.corruption = tag;
  return out;
}

int CorpusConfig::base_count(SplitName s) { return kSplitUnits[split_index(s)] * 2000; }

int CorpusConfig::scaled_count(SplitName s, double scale) {
  if (!(scale >= 0) || !std::isfinite(scale)) throw FormatError("scale must be a non-negative number");
  return kSplitUnits[split_index(s)] * static_cast<int>(std::llround(2000 * scale));
}

std::vector<SplitSpec> CorpusConfig::resolved_splits() const {
  std::vector<SplitSpec> out;
  for (SplitName name : kAllSplits) {
    SplitSpec spec = SplitSpec::defaults(name);
    for (const SplitSpec& s : splits) {
      if (s.name == name) spec = s;
    }
    if (!fixed_counts.contains(name)) spec.count = scaled_count(name, scale);
    spec.validate();
    out.push_back(std::move(spec));
  }
  return out;
}

CorpusConfig load_corpus_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("corpus config: ") + e.what());
  }
  if (!doc.is_object()) throw FormatError("corpus config must be an object");
  CorpusConfig cfg;
  try {
    if (doc.contains("scale")) cfg.scale = doc["scale"].get<double>();
    if (doc.contains("seeds")) {
      const json& seeds = doc["seeds"];
      if (!seeds.is_array() || seeds.empty()) throw FormatError("corpus config: seeds must be a non-empty list");
      cfg.seed = seeds[0].get<std::uint64_t>();
    }
    if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("workers")) cfg.workers = doc["workers"].get<int>();
    if (doc.contains("splits")) {
      for (const auto& [key, j] : doc["splits"].items()) {
        const auto name = parse_split(key);
        if (!name) throw FormatError("corpus config: unknown split '" + key + "'");
        SplitSpec s = SplitSpec::defaults(*name);
        if (j.contains("count")) {
          s.count = j["count"].get<int>();
          cfg.fixed_counts.insert(*name);
        }
        if (j.contains("node_range")) s.node_range = range_from_json(j["node_range"], "node_range");
        if (j.contains("edge_range")) s.edge_range = range_from_json(j["edge_range"], "edge_range");
        if (j.contains("extra_edges")) s.extra_edges = range_from_json(j["extra_edges"], "extra_edges");
        if (j.contains("node_weights")) s.node_weights = j["node_weights"].get<std::vector<double>>();
        else if (j.contains("node_range")) s.node_weights.clear();
        if (j.contains("extra_edge_weights")) s.extra_edge_weights = j["extra_edge_weights"].get<std::vector<double>>();
        else if (j.contains("extra_edges")) s.extra_edge_weights.clear();
        if (j.contains("held_out_templates")) s.held_out_templates = j["held_out_templates"].get<bool>();
        if (j.contains("canvases")) {
          s.canvas_options.clear();
          for (const json& c : j["canvases"]) s.canvas_options.push_back({0, 0, c.at(0).get<double>(), c.at(1).get<double>()});
        }
        s.validate();
        cfg.splits.push_back(std::move(s));
      }
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("corpus config: ") + e.what());
  }
  if (cfg.workers < 1) throw FormatError("corpus config: workers must be at least 1");
  cfg.resolved_splits();
  return cfg;
}

const SplitManifest& CorpusManifest::split(SplitName s) const {
  for (const SplitManifest& m : splits) {
    if (m.name == s) return m;
  }
  throw FormatError("manifest has no split '" + std::string(to_string(s)) + "'");
}

json manifest_to_json(const CorpusManifest& m) {
  json splits = json::object();
  for (const SplitManifest& s : m.splits) {
    splits[std::string(to_string(s.name))] = {
        {"count", s.count},
        {"seed_base", s.seed_base},
        {"checksum", s.checksum},
        {"mean_nodes", s.mean_nodes},
        {"mean_edges", s.mean_edges},
        {"mean_text_boxes", s.mean_text_boxes},
        {"mean_branches", s.mean_branches},
        {"mean_groups", s.mean_groups},
        {"node_range", {s.nodes_seen.lo, s.nodes_seen.hi}},
        {"edge_range", {s.edges_seen.lo, s.edges_seen.hi}},
    };
  }
  return {{"scale", m.scale}, {"seed", m.seed}, {"splits", splits}};
}

CorpusManifest load_manifest(const std::filesystem::path& root) {
  CorpusManifest m;
  m.root = root;
  try {
    const json doc = json::parse(read_file(root / "manifest.json"));
    m.scale = doc.at("scale").get<double>();
    m.seed = doc.at("seed").get<std::uint64_t>();
    for (const auto& [key, j] : doc.at("splits").items()) {
      const auto name = parse_split(key);
      if (!name) throw FormatError("manifest: unknown split '" + key + "'");
      SplitManifest s;
      s.name = *name;
      s.count = j.at("count").get<int>();
      s.seed_base = j.at("seed_base").get<std::uint64_t>();
      s.checksum = j.at("checksum").get<std::string>();
      s.mean_nodes = j.at("mean_nodes").get<double>();
      s.mean_edges = j.at("mean_edges").get<double>();
      s.mean_text_boxes = j.at("mean_text_boxes").get<double>();
      s.mean_branches = j.at("mean_branches").get<double>();
      s.mean_groups = j.at("mean_groups").get<double>();
      s.nodes_seen = range_from_json(j.at("node_range"), "node_range");
      s.edges_seen = range_from_json(j.at("edge_range"), "edge_range");
      m.splits.push_back(s);
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("manifest: ") + e.what());
  }
  std::sort(m.splits.begin(), m.splits.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
  return m;
}

std::uint64_t sample_seed(std::uint64_t corpus_seed, SplitName split, std::uint64_t index) {
  return (corpus_seed << 40) | (static_cast<std::uint64_t>(split_index(split)) << 32) | (index & 0xffffffffu);
}

std::string sample_stem(SplitName split, std::size_t index) {
  std::string digits = std::to_string(index);
  if (digits.size() < 6) digits.insert(0, 6 - digits.size(), '0');
  return std::string(to_string(split)) + "_" + digits;
}

namespace {

template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn fn) {
  const std::size_t threads = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), 1, std::max<std::size_t>(n, 1));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  const auto work = [&]() {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  if (threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

std::vector<CorpusSample> generate_split(const SplitSpec& spec, std::uint64_t corpus_seed, int workers) {
  spec.validate();
  std::vector<CorpusSample> out(static_cast<std::size_t>(spec.count));
  parallel_for(out.size(), workers, [&](std::size_t i) {
    const FamilyKind family = kAllFamilies[i % std::size(kAllFamilies)];
    CorpusSample s = generate_sample(family, spec, sample_seed(corpus_seed, spec.name, i));
    s.sample_id = sample_stem(spec.name, i);
    out[i] = std::move(s);
  });
  return out;
}

void write_sample(const CorpusSample& sample, const std::filesystem::path& dir) {
  for (const auto& [ext, content] : sample_files(sample)) write_file_atomic(dir / (sample.sample_id + ext), content);
}

CorpusManifest build_corpus(const CorpusConfig& config, const std::filesystem::path& root) {
  CorpusManifest manifest;
  manifest.root = root;
  manifest.scale = config.scale;
  manifest.seed = config.seed;
  std::error_code ec;
  std::filesystem::create_directories(root, ec);
  if (ec) throw IoError("cannot create " + root.string() + ": " + ec.message());
  for (const SplitSpec& spec : config.resolved_splits()) {
    const std::filesystem::path dir = root / std::string(to_string(spec.name));
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    const std::vector<CorpusSample> samples = generate_split(spec, config.seed, config.workers);
    parallel_for(samples.size(), config.workers, [&](std::size_t i) { write_sample(samples[i], dir); });

    SplitManifest sm;
    sm.name = spec.name;
    sm.count = static_cast<int>(samples.size());
    sm.seed_base = sample_seed(config.seed, spec.name, 0);
    Sha256 sha;
    DiagramStats sum;
    sm.nodes_seen = {std::numeric_limits<int>::max(), 0};
    sm.edges_seen = {std::numeric_limits<int>::max(), 0};
    for (const CorpusSample& s : samples) {
      for (const auto& [ext, content] : sample_files(s)) {
        sha.update(s.sample_id + ext);
        sha.update(std::string_view("\0", 1));
        sha.update(content);
      }
      const DiagramStats st = compute_stats(s.plan);
      sum.nodes += st.nodes;
      sum.edges += st.edges;
      sum.text_boxes += st.text_boxes;
      sum.branches += st.branches;
      sum.groups += st.groups;
      sm.nodes_seen = {std::min(sm.nodes_seen.lo, st.nodes), std::max(sm.nodes_seen.hi, st.nodes)};
      sm.edges_seen = {std::min(sm.edges_seen.lo, st.edges), std::max(sm.edges_seen.hi, st.edges)};
    }
    if (samples.empty()) sm.nodes_seen = sm.edges_seen = {0, 0};
    sm.checksum = sha.hex();
    const double n = samples.empty() ? 1.0 : static_cast<double>(samples.size());
    sm.mean_nodes = sum.nodes / n;
    sm.mean_edges = sum.edges / n;
    sm.mean_text_boxes = sum.text_boxes / n;
    sm.mean_branches = sum.branches / n;
    sm.mean_groups = sum.groups / n;
    manifest.splits.push_back(sm);
  }
  write_file_atomic(root / "manifest.json", manifest_to_json(manifest).dump(2) + "\n");
  return manifest;
}

CorpusSample load_sample(const std::filesystem::path& dir, std::string_view stem) {
  const std::string base = std::string(stem);
  CorpusSample s;
  s.sample_id = base;
  s.prompt = read_file(dir / (base + ".prompt.txt"));
  if (!s.prompt.empty() && s.prompt.back() == '\n') s.prompt.pop_back();
  s.plan = deserialize_plan(read_file(dir / (base + ".plan")));
  s.svg = read_file(dir / (base + ".svg"));
  json meta;
  try {
    meta = json::parse(read_file(dir / (base + ".meta")));
  } catch (const json::parse_error& e) {
    throw FormatError(base + ".meta: " + e.what());
  }
  s.metadata = metadata_from_json(meta);
  const auto family = parse_family(s.metadata.family);
  if (!family) throw FormatError(base + ".meta: unknown family '" + s.metadata.family + "'");
  s.family = *family;
  s.seed = s.metadata.seed;
  try {
    s.corruption = corruption_from_json(meta.value("corruption", json()));
  } catch (const json::exception& e) {
    throw FormatError(base + ".meta: " + e.what());
  }
  const GeoMetadata expect = compute_metadata(s.plan, s.family, s.metadata.template_name, s.seed, s.metadata.font_size);
  if (!(expect.doc == s.metadata.doc)) throw ReferenceMismatch(base + ": metadata does not match its plan");
  return s;
}

std::vector<CorpusSample> load_split(const std::filesystem::path& dir, std::size_t limit) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) throw IoError("not a directory: " + dir.string());
  std::vector<std::string> stems;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    const std::filesystem::path& p = entry.path();
    if (p.extension() == ".plan") stems.push_back(p.stem().string());
  }
  if (ec) throw IoError("cannot list " + dir.string() + ": " + ec.message());
  std::sort(stems.begin(), stems.end());
  if (limit > 0 && stems.size() > limit) stems.resize(limit);
  std::vector<CorpusSample> out;
  out.reserve(stems.size());
  for (const std::string& stem : stems) out.push_back(load_sample(dir, stem));
  return out;
}

}  // namespace geosvg
