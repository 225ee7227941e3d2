#include "geosvg/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>

#include "geosvg/corpus.hpp"
#include "geosvg/errors.hpp"
#include "geosvg/format.hpp"
#include "geosvg/grpo.hpp"
#include "geosvg/metrics.hpp"
#include "geosvg/render_oracle.hpp"
#include "geosvg/verifier.hpp"

namespace geosvg {

namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RendererOpts {
  std::string renderer = "builtin";
  std::string command;

  void add_to(CLI::App* app) {
    app->add_option("--renderer", renderer, "Geometry source: builtin or external")
        ->check(CLI::IsMember({"builtin", "external"}))
        ->capture_default_str();
    app->add_option("--renderer-cmd", command, "Command line of the external measurement service");
  }
  void check() const {
    if (renderer == "external" && command.empty()) throw UsageError("--renderer external requires --renderer-cmd");
  }
  std::unique_ptr<GeometryOracle> make() const {
    if (renderer == "external") return std::make_unique<ProcessOracle>(command);
    return nullptr;
  }
};

VerifierConfig verifier_config(const std::string& path) {
  return path.empty() ? VerifierConfig{} : load_verifier_config(read_file(path));
}

FontModel font_model(const std::string& path) {
  return path.empty() ? FontModel::builtin() : load_font_model(read_file(path));
}

void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
  if (out_path.empty()) {
    out << text;
  } else {
    write_file_atomic(out_path, text);
  }
}

// ---------------------------------------------------------------------------------------------

struct GenOpts {
  double scale = 1.0;
  std::string out;
  std::uint64_t seed = 13;
  std::string config;
  int workers = 8;
};

int cmd_gen(const GenOpts& o, CLI::App* sub, std::ostream& out) {
  CorpusConfig cfg = o.config.empty() ? CorpusConfig{} : load_corpus_config(read_file(o.config));
  if (!o.config.empty()) {
    if (sub->count("--scale") > 0) cfg.scale = o.scale;
    if (sub->count("--seed") > 0) cfg.seed = o.seed;
    if (sub->count("--workers") > 0) cfg.workers = o.workers;
  } else {
    cfg.scale = o.scale;
    cfg.seed = o.seed;
    cfg.workers = o.workers;
  }
  if (!(cfg.scale >= 0)) throw UsageError("--scale must be non-negative");
  if (cfg.workers < 1) throw UsageError("--workers must be at least 1");
  const CorpusManifest m = build_corpus(cfg, o.out);
  for (const SplitManifest& s : m.splits) out << to_string(s.name) << ' ' << s.count << '\n';
  out << "manifest: " << (fs::path(o.out) / "manifest.json").string() << '\n';
  return 0;
}

struct VerifyOpts {
  std::string svg;
  std::string plan;
  bool json = false;
  std::string config;
  std::string font;
  long update = -1;
  RendererOpts renderer;
};

int cmd_verify(const VerifyOpts& o, std::ostream& out) {
  o.renderer.check();
  const VerifierConfig cfg = verifier_config(o.config);
  const LayoutPlan plan = deserialize_plan(read_file(o.plan));
  const std::string svg = read_file(o.svg);
  std::optional<WeightSet> weights;
  if (o.update >= 0) weights = curriculum_weights(cfg.weights, o.update);
  const std::unique_ptr<GeometryOracle> oracle = o.renderer.make();
  const RewardBreakdown r = verify(svg, plan, cfg, weights, font_model(o.font), oracle.get());
  if (o.json) {
    out << breakdown_to_json(r).dump(2) << '\n';
  } else {
    const std::pair<const char*, double> rows[] = {
        {"exec", r.exec},       {"fit", r.fit},     {"overflow", r.overflow},   {"anchor_acc", r.anchor_acc},
        {"anchor_err", r.anchor_err}, {"text_in_box", r.text_in_box}, {"padding", r.padding},
        {"graph", r.graph},     {"clean", r.clean}, {"total", r.total}};
    for (const auto& [name, v] : rows) out << name << ' ' << format_number(v) << '\n';
    for (const std::string& d : r.diagnostics) out << "diagnostic: " << d << '\n';
  }
  return 0;
}

struct EvalOpts {
  std::string corpus;
  std::string pred;
  std::string format = "md";
  std::string out;
  std::string config;
  std::string font;
  int workers = 8;
  RendererOpts renderer;
};

int cmd_eval(const EvalOpts& o, std::ostream& out) {
  o.renderer.check();
  if (o.workers < 1) throw UsageError("--workers must be at least 1");
  const ReportFormat format = *parse_report_format(o.format);
  OracleFactory factory;
  if (o.renderer.renderer == "external") {
    factory = [cmd = o.renderer.command]() { return std::make_unique<ProcessOracle>(cmd); };
  }
  const std::vector<SampleRecord> records =
      evaluate_directory(o.corpus, o.pred, verifier_config(o.config), o.workers, font_model(o.font), factory);
  emit(emit_report(aggregate(records), format), o.out, out);
  return 0;
}

struct TrainOpts {
  std::string corpus;
  std::string split = "train";
  std::string config;
  std::string log;
  std::vector<std::uint64_t> seeds;
  int updates = -1;
  int group_size = -1;
  double learning_rate = -1;
  std::size_t limit = 256;
};

int cmd_train(const TrainOpts& o, std::ostream& out) {
  GrpoConfig cfg = o.config.empty() ? GrpoConfig{} : load_grpo_config(read_file(o.config));
  if (o.updates >= 0) cfg.updates = o.updates;
  if (o.group_size >= 0) cfg.group_size = o.group_size;
  if (o.learning_rate >= 0) cfg.learning_rate = o.learning_rate;
  if (!o.seeds.empty()) cfg.seeds = o.seeds;
  try {
    cfg.validate();
  } catch (const FormatError& e) {
    throw UsageError(e.what());
  }
  fs::path dir = o.corpus;
  if (fs::exists(dir / "manifest.json")) dir /= o.split;
  const std::vector<CorpusSample> samples = load_split(dir, o.limit);

  std::ofstream file;
  if (!o.log.empty()) {
    file.open(o.log, std::ios::trunc);
    if (!file) throw IoError("cannot open " + o.log);
  }
  std::ostream& sink = o.log.empty() ? out : file;
  for (std::uint64_t seed : cfg.seeds) {
    train(samples, cfg, seed, [&](const UpdateLog& u) {
      nlohmann::json line = update_log_to_json(u);
      line["seed"] = seed;
      sink << line.dump() << '\n';
    });
  }
  if (!o.log.empty()) {
    file.close();
    if (!file) throw IoError("cannot write " + o.log);
  }
  return 0;
}

struct OracleOpts {
  std::string command;
  bool builtin = false;
  std::size_t requests = 100;
};

int cmd_oracle_check(const OracleOpts& o, std::ostream& out) {
  if (!o.builtin && o.command.empty()) throw UsageError("oracle-check needs --renderer-cmd or --builtin");
  std::unique_ptr<GeometryOracle> oracle;
  if (o.builtin) {
    oracle = std::make_unique<BuiltinOracle>();
  } else {
    oracle = std::make_unique<ProcessOracle>(o.command);
  }
  const OracleCheckReport report = oracle_check(*oracle, o.requests);
  for (const OracleCheck& c : report.checks) {
    out << (c.passed ? "PASS " : "FAIL ") << c.name;
    if (!c.detail.empty()) out << ": " << c.detail;
    out << '\n';
  }
  out << "requests " << report.requests << " max_latency_ms " << format_number(report.max_latency_ms) << '\n';
  return report.passed() ? 0 : 1;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Geometry-aware SVG diagram verifier, corpus generator and toy GRPO trainer", "geosvg"};
  app.require_subcommand(1);

  GenOpts gen;
  CLI::App* gen_cmd = app.add_subcommand("gen", "Generate a synthetic diagram corpus");
  gen_cmd->add_option("--scale", gen.scale, "Fraction of the full split sizes")->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();
  gen_cmd->add_option("--seed", gen.seed, "Corpus seed")->capture_default_str();
  gen_cmd->add_option("--config", gen.config, "Corpus config file");
  gen_cmd->add_option("--workers", gen.workers, "Worker threads")->capture_default_str();

  VerifyOpts ver;
  CLI::App* ver_cmd = app.add_subcommand("verify", "Score one SVG against its layout plan");
  ver_cmd->add_option("--svg", ver.svg, "Candidate SVG file")->required();
  ver_cmd->add_option("--plan", ver.plan, "Layout plan file")->required();
  ver_cmd->add_flag("--json", ver.json, "Emit the reward breakdown as JSON");
  ver_cmd->add_option("--config", ver.config, "Verifier config file");
  ver_cmd->add_option("--font", ver.font, "Font metrics file");
  ver_cmd->add_option("--update", ver.update, "Training update index for curriculum weights");
  ver.renderer.add_to(ver_cmd);

  EvalOpts ev;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Compute the evaluation metrics over a prediction directory");
  eval_cmd->add_option("--corpus", ev.corpus, "Reference split directory")->required();
  eval_cmd->add_option("--pred", ev.pred, "Directory of <sample_id>.svg predictions")->required();
  eval_cmd->add_option("--format", ev.format, "Report format")
      ->check(CLI::IsMember({"json", "csv", "md"}))
      ->capture_default_str();
  eval_cmd->add_option("--out", ev.out, "Report file (stdout when omitted)");
  eval_cmd->add_option("--config", ev.config, "Verifier config file");
  eval_cmd->add_option("--font", ev.font, "Font metrics file");
  eval_cmd->add_option("--workers", ev.workers, "Worker threads")->capture_default_str();
  ev.renderer.add_to(eval_cmd);

  TrainOpts tr;
  CLI::App* train_cmd = app.add_subcommand("train-toy", "Run GRPO on the toy perturbation policy");
  train_cmd->add_option("--corpus", tr.corpus, "Corpus root or split directory")->required();
  train_cmd->add_option("--split", tr.split, "Split to draw prompts from")->capture_default_str();
  train_cmd->add_option("--config", tr.config, "GRPO config file");
  train_cmd->add_option("--log", tr.log, "JSONL log file (stdout when omitted)");
  train_cmd->add_option("--seed", tr.seeds, "Training seeds (default 13 21 42)");
  train_cmd->add_option("--updates", tr.updates, "Number of updates");
  train_cmd->add_option("--group-size", tr.group_size, "Candidates per group");
  train_cmd->add_option("--lr", tr.learning_rate, "Learning rate");
  train_cmd->add_option("--limit", tr.limit, "Samples loaded from the split")->capture_default_str();

  OracleOpts orc;
  CLI::App* oracle_cmd = app.add_subcommand("oracle-check", "Self-test the external measurement protocol");
  oracle_cmd->add_option("--renderer-cmd", orc.command, "Command line of the external measurement service");
  oracle_cmd->add_flag("--builtin", orc.builtin, "Test the builtin engine instead");
  oracle_cmd->add_option("--requests", orc.requests, "Number of requests")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*gen_cmd) return cmd_gen(gen, gen_cmd, out);
    if (*ver_cmd) return cmd_verify(ver, out);
    if (*eval_cmd) return cmd_eval(ev, out);
    if (*train_cmd) return cmd_train(tr, out);
    if (*oracle_cmd) return cmd_oracle_check(orc, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("geosvg");
  for (const std::string& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace geosvg
