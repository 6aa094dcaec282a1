#include "calev/commands.hpp"

#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "calev/analysis.hpp"
#include "calev/dataset.hpp"
#include "calev/error.hpp"
#include "calev/metrics.hpp"
#include "calev/reference.hpp"
#include "calev/report_io.hpp"
#include "calev/svg.hpp"
#include "calev/temperature.hpp"

namespace calev {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void emit_event(const json& event) { std::cerr << event.dump() << "\n"; }

void emit_error(ErrorKind kind, const std::string& message) {
  json event;
  event["event"] = "error";
  event["kind"] = error_kind_name(kind);
  event["message"] = message;
  emit_event(event);
}

// Config-file merge: a binding applies its JSON value only when the CLI did
// not set the option, implementing CLI > config file > defaults.
struct Merger {
  struct Binding {
    CLI::Option* option;
    std::string key;
    std::function<void(const json&)> apply;
  };
  std::vector<Binding> bindings;

  void bind(CLI::Option* option, std::string key, std::function<void(const json&)> apply) {
    bindings.push_back({option, std::move(key), std::move(apply)});
  }

  void apply(const json& config) const {
    for (const auto& binding : bindings) {
      if (binding.option != nullptr && binding.option->count() > 0) continue;
      auto it = config.find(binding.key);
      if (it == config.end()) continue;
      try {
        binding.apply(*it);
      } catch (const Error&) {
        throw;
      } catch (const std::exception& e) {
        throw Error(ErrorKind::Usage,
                    "config key \"" + binding.key + "\": " + e.what());
      }
    }
  }
};

template <typename T>
void bind_value(Merger& merger, CLI::Option* option, const std::string& key, T& target) {
  merger.bind(option, key, [&target](const json& v) { target = v.get<T>(); });
}

std::vector<std::string> string_list(const json& v) {
  if (v.is_string()) {
    std::vector<std::string> out;
    std::string item;
    for (char ch : v.get<std::string>()) {
      if (ch == ',') {
        out.push_back(item);
        item.clear();
      } else {
        item += ch;
      }
    }
    out.push_back(item);
    return out;
  }
  return v.get<std::vector<std::string>>();
}

void bind_string_list(Merger& merger, CLI::Option* option, const std::string& key,
                      std::vector<std::string>& target) {
  merger.bind(option, key, [&target](const json& v) { target = string_list(v); });
}

void bind_int_list(Merger& merger, CLI::Option* option, const std::string& key,
                   std::vector<std::int64_t>& target) {
  merger.bind(option, key, [&target](const json& v) {
    if (v.is_string()) {
      target.clear();
      for (const auto& s : string_list(v)) target.push_back(std::stoll(s));
    } else {
      target = v.get<std::vector<std::int64_t>>();
    }
  });
}

void bind_double_list(Merger& merger, CLI::Option* option, const std::string& key,
                      std::vector<double>& target) {
  merger.bind(option, key, [&target](const json& v) {
    if (v.is_string()) {
      target.clear();
      for (const auto& s : string_list(v)) target.push_back(std::stod(s));
    } else {
      target = v.get<std::vector<double>>();
    }
  });
}

json load_config_file(const std::string& path) {
  std::string text = read_text_file(path);
  json config = json::parse(text, nullptr, false);
  if (config.is_discarded() || !config.is_object()) {
    throw Error(ErrorKind::Validation,
                std::string(path) + ": config file must be a JSON object");
  }
  return config;
}

struct CommonOpts {
  std::string config_path;
  bool json_output = false;
};

void add_common(CLI::App* cmd, Merger& merger, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path,
                  "JSON config file; CLI flags win over its keys")
      ->envname("CALEV_CONFIG");
  auto* json_opt =
      cmd->add_flag("--json", opts.json_output, "Structured JSON summary on stdout");
  bind_value(merger, json_opt, "json", opts.json_output);
}

struct FormatOpts {
  std::vector<std::string> classes = {"e", "n", "c"};
  std::string uid_key = "uid";
  std::string votes_key = "label_counter";
  std::string pred_uid_key = "uid";
  std::string probs_key = "probs";
  std::string logits_key = "logits";

  AnnotationFormat annotation_format() const {
    AnnotationFormat format;
    format.uid_key = uid_key;
    format.votes_key = votes_key;
    format.class_names = classes;
    return format;
  }
  PredictionFormat prediction_format() const {
    PredictionFormat format;
    format.uid_key = pred_uid_key;
    format.probs_key = probs_key;
    format.logits_key = logits_key;
    return format;
  }
};

void add_annotation_format(CLI::App* cmd, Merger& merger, FormatOpts& opts) {
  auto* classes = cmd->add_option("--classes", opts.classes,
                                  "Ordered class names in annotation files")
                      ->delimiter(',');
  bind_string_list(merger, classes, "classes", opts.classes);
  bind_value(merger,
             cmd->add_option("--uid-key", opts.uid_key, "Annotation uid field"),
             "uid-key", opts.uid_key);
  bind_value(merger,
             cmd->add_option("--votes-key", opts.votes_key,
                             "Annotation vote-count object field"),
             "votes-key", opts.votes_key);
}

void add_prediction_format(CLI::App* cmd, Merger& merger, FormatOpts& opts) {
  bind_value(merger,
             cmd->add_option("--pred-uid-key", opts.pred_uid_key,
                             "Prediction uid field"),
             "pred-uid-key", opts.pred_uid_key);
  bind_value(merger,
             cmd->add_option("--probs-key", opts.probs_key,
                             "Prediction probability-array field"),
             "probs-key", opts.probs_key);
  bind_value(merger,
             cmd->add_option("--logits-key", opts.logits_key,
                             "Prediction logit-array field"),
             "logits-key", opts.logits_key);
}

struct EvalCoreOpts {
  int bins = 10;
  std::string entropy_base = "nats";
  std::string rank_mode = "strict";
  std::string align_mode = "strict";
};

void add_eval_core(CLI::App* cmd, Merger& merger, EvalCoreOpts& opts,
                   bool with_rank_and_base) {
  bind_value(merger,
             cmd->add_option("--bins", opts.bins, "Reliability bin count M"),
             "bins", opts.bins);
  if (with_rank_and_base) {
    bind_value(merger,
               cmd->add_option("--entropy-base", opts.entropy_base,
                               "Entropy unit: nats or bits"),
               "entropy-base", opts.entropy_base);
    bind_value(merger,
               cmd->add_option("--rank-mode", opts.rank_mode,
                               "Ranking comparison: strict or lenient"),
               "rank-mode", opts.rank_mode);
  }
  bind_value(merger,
             cmd->add_option("--align", opts.align_mode,
                             "uid alignment: strict or intersect"),
             "align", opts.align_mode);
}

EntropyBase parse_entropy_base(const std::string& name) {
  if (name == "nats") return EntropyBase::Nats;
  if (name == "bits") return EntropyBase::Bits;
  throw Error(ErrorKind::Usage,
              "unknown entropy base \"" + name + "\" (expected nats or bits)");
}

RankMode parse_rank_mode(const std::string& name) {
  if (name == "strict") return RankMode::Strict;
  if (name == "lenient") return RankMode::Lenient;
  throw Error(ErrorKind::Usage,
              "unknown rank mode \"" + name + "\" (expected strict or lenient)");
}

AlignMode parse_align_mode(const std::string& name) {
  if (name == "strict") return AlignMode::Strict;
  if (name == "intersect") return AlignMode::Intersect;
  throw Error(ErrorKind::Usage,
              "unknown alignment mode \"" + name + "\" (expected strict or intersect)");
}

void require_option(const std::string& value, const char* flag) {
  if (value.empty()) {
    throw Error(ErrorKind::Usage, std::string(flag) + " is required");
  }
}

void require_positive(int value, const char* flag) {
  if (value < 1) {
    throw Error(ErrorKind::Usage, std::string(flag) + " must be >= 1");
  }
}

void ensure_parent_dir(const fs::path& path) {
  fs::path parent = path.parent_path();
  if (!parent.empty()) {
    std::error_code ec;
    fs::create_directories(parent, ec);
    if (ec) {
      throw Error(ErrorKind::Validation,
                  "cannot create directory " + parent.string() + ": " + ec.message());
    }
  }
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw Error(ErrorKind::Validation,
                "cannot create directory " + dir.string() + ": " + ec.message());
  }
}

void print_summary(bool json_mode, const json& data,
                   const std::vector<std::string>& lines) {
  if (json_mode) {
    std::cout << data.dump(2) << "\n";
  } else {
    for (const auto& line : lines) std::cout << line << "\n";
  }
}

void emit_drop_report(const AlignedDataset& dataset) {
  json event;
  event["event"] = "alignment_drops";
  event["annotations_dropped"] = dataset.drops.annotations_dropped;
  event["predictions_dropped"] = dataset.drops.predictions_dropped;
  emit_event(event);
}

void set_format_entries(RunConfig& rc, const FormatOpts& fmt) {
  rc.set("classes", fmt.classes);
  rc.set("uid_key", fmt.uid_key);
  rc.set("votes_key", fmt.votes_key);
  rc.set("pred_uid_key", fmt.pred_uid_key);
  rc.set("probs_key", fmt.probs_key);
  rc.set("logits_key", fmt.logits_key);
}

// ---------------------------------------------------------------- evaluate

struct EvaluateOpts {
  CommonOpts common;
  FormatOpts fmt;
  EvalCoreOpts core;
  std::string annotations;
  std::string predictions;
  std::string out_dir = ".";
};

int cmd_evaluate(const EvaluateOpts& opts) {
  require_option(opts.annotations, "--annotations");
  require_option(opts.predictions, "--predictions");
  require_positive(opts.core.bins, "--bins");

  EvalConfig config;
  config.bins.bin_count = opts.core.bins;
  config.entropy_base = parse_entropy_base(opts.core.entropy_base);
  config.rank_mode = parse_rank_mode(opts.core.rank_mode);
  AlignMode align_mode = parse_align_mode(opts.core.align_mode);

  AnnotationData annotations =
      read_annotations(opts.annotations, opts.fmt.annotation_format());
  std::vector<PredictionRecord> predictions =
      read_predictions(opts.predictions, opts.fmt.prediction_format(),
                       annotations.class_count());
  AlignedDataset dataset = align(annotations, predictions, align_mode);
  if (align_mode == AlignMode::Intersect) emit_drop_report(dataset);

  EvaluationReport report = evaluate(dataset, config);

  RunConfig rc;
  rc.command = "evaluate";
  rc.set("annotations", opts.annotations);
  rc.set("predictions", opts.predictions);
  rc.set("out_dir", opts.out_dir);
  rc.set("align", opts.core.align_mode);
  set_format_entries(rc, opts.fmt);

  ensure_dir(opts.out_dir);
  fs::path report_path = fs::path(opts.out_dir) / "report.json";
  fs::path tsv_path = fs::path(opts.out_dir) / "per_instance.tsv";
  write_text_file(report_path, evaluation_report_json(report, rc));
  write_text_file(tsv_path, per_instance_tsv(report));

  json summary;
  summary["type"] = "calev.summary";
  summary["command"] = "evaluate";
  summary["n"] = report.n;
  summary["class_count"] = report.class_count;
  json metrics;
  metrics["accuracy"] = report.accuracy;
  metrics["ece"] = report.ece;
  metrics["classwise_ece"] = report.classwise_ece;
  metrics["rank_cs"] = report.rank_cs;
  metrics["mean_ent_ce"] = report.mean_ent_ce;
  metrics["mean_abs_ent_ce"] = report.mean_abs_ent_ce;
  metrics["mean_dist_ce"] = report.mean_dist_ce;
  summary["metrics"] = metrics;
  summary["outputs"] = {report_path.string(), tsv_path.string()};

  print_summary(opts.common.json_output, summary,
                {"evaluated " + std::to_string(report.n) + " instances, " +
                     std::to_string(report.class_count) + " classes",
                 "  accuracy         " + format_double(report.accuracy),
                 "  ece              " + format_double(report.ece) + "  (M = " +
                     std::to_string(config.bins.bin_count) + ")",
                 "  classwise_ece    " + format_double(report.classwise_ece),
                 "  rank_cs          " + format_double(report.rank_cs) + "  (" +
                     opts.core.rank_mode + ")",
                 "  mean_ent_ce      " + format_double(report.mean_ent_ce) + " " +
                     opts.core.entropy_base,
                 "  mean_abs_ent_ce  " + format_double(report.mean_abs_ent_ce) + " " +
                     opts.core.entropy_base,
                 "  mean_dist_ce     " + format_double(report.mean_dist_ce),
                 "wrote " + report_path.string(),
                 "wrote " + tsv_path.string()});
  return 0;
}

// ---------------------------------------------------------------- calibrate

struct CalibrateOpts {
  CommonOpts common;
  FormatOpts fmt;
  EvalCoreOpts core;
  std::string annotations;
  std::string predictions;
  std::string out_dir = ".";
  double t_min = 0.1;
  double t_max = 5.0;
  double t_step = 0.01;
  std::optional<double> temperature;
};

int cmd_calibrate(const CalibrateOpts& opts) {
  require_option(opts.annotations, "--annotations");
  require_option(opts.predictions, "--predictions");
  require_positive(opts.core.bins, "--bins");

  BinningConfig bins{opts.core.bins};
  AlignMode align_mode = parse_align_mode(opts.core.align_mode);

  AnnotationData annotations =
      read_annotations(opts.annotations, opts.fmt.annotation_format());
  std::vector<PredictionRecord> predictions =
      read_predictions(opts.predictions, opts.fmt.prediction_format(),
                       annotations.class_count());
  AlignedDataset dataset = align(annotations, predictions, align_mode);
  if (align_mode == AlignMode::Intersect) emit_drop_report(dataset);

  RunConfig rc;
  rc.command = "calibrate";
  rc.set("annotations", opts.annotations);
  rc.set("predictions", opts.predictions);
  rc.set("out_dir", opts.out_dir);
  rc.set("align", opts.core.align_mode);
  rc.set("bins", static_cast<std::int64_t>(opts.core.bins));
  set_format_entries(rc, opts.fmt);

  ensure_dir(opts.out_dir);
  fs::path scaled_path = fs::path(opts.out_dir) / "predictions_scaled.jsonl";

  json summary;
  summary["type"] = "calev.summary";
  summary["command"] = "calibrate";
  std::vector<std::string> lines;

  if (opts.temperature.has_value()) {
    Temperature t = Temperature::of(*opts.temperature);
    rc.set("temperature", t.value);
    AlignedDataset scaled = scale_dataset(dataset, t);
    double scaled_ece = ece(scaled, bins).value;
    std::vector<PredictionRecord> out;
    out.reserve(scaled.instances.size());
    for (const auto& instance : scaled.instances) out.push_back(instance.prediction);
    write_predictions(scaled_path, out);

    summary["temperature"] = t.value;
    summary["ece"] = scaled_ece;
    summary["outputs"] = {scaled_path.string()};
    lines = {"applied fixed temperature " + format_double(t.value),
             "  ece at t         " + format_double(scaled_ece) + "  (M = " +
                 std::to_string(bins.bin_count) + ")",
             "wrote " + scaled_path.string()};
  } else {
    TemperatureGrid grid{opts.t_min, opts.t_max, opts.t_step};
    rc.set("t_min", grid.t_min);
    rc.set("t_max", grid.t_max);
    rc.set("t_step", grid.step);
    TemperatureSearchResult result = search_oracle_temperature(dataset, grid, bins);
    AlignedDataset scaled = scale_dataset(dataset, result.best);
    std::vector<PredictionRecord> out;
    out.reserve(scaled.instances.size());
    for (const auto& instance : scaled.instances) out.push_back(instance.prediction);

    fs::path search_path = fs::path(opts.out_dir) / "search.json";
    fs::path trace_path = fs::path(opts.out_dir) / "trace.tsv";
    write_text_file(search_path, search_result_json(result, rc));
    write_text_file(trace_path, trace_tsv(result));
    write_predictions(scaled_path, out);

    summary["best_t"] = result.best.value;
    summary["best_ece"] = result.best_ece;
    summary["grid_points"] = static_cast<std::int64_t>(result.trace.size());
    summary["outputs"] = {search_path.string(), trace_path.string(),
                          scaled_path.string()};
    lines = {"searched " + std::to_string(result.trace.size()) +
                 " temperatures on [" + format_double(grid.t_min) + ", " +
                 format_double(grid.t_max) + "] step " + format_double(grid.step),
             "  best_t           " + format_double(result.best.value),
             "  best_ece         " + format_double(result.best_ece) + "  (M = " +
                 std::to_string(bins.bin_count) + ")",
             "wrote " + search_path.string(),
             "wrote " + trace_path.string(),
             "wrote " + scaled_path.string()};
  }

  print_summary(opts.common.json_output, summary, lines);
  return 0;
}

// ---------------------------------------------------------------- reference

struct ReferenceOpts {
  CommonOpts common;
  FormatOpts fmt;
  std::string annotations;
  std::string kind = "oracle";
  std::string out;
  std::int64_t k = 0;
  std::optional<std::uint64_t> seed;
  bool with_replacement = false;
};

int cmd_reference(const ReferenceOpts& opts) {
  require_option(opts.annotations, "--annotations");

  ReferenceSpec spec;
  if (opts.kind == "oracle") {
    spec.kind = ReferenceKind::Oracle;
  } else if (opts.kind == "subsampled") {
    spec.kind = ReferenceKind::SubsampledHuman;
  } else if (opts.kind == "uniform") {
    spec.kind = ReferenceKind::Uniform;
  } else {
    throw Error(ErrorKind::Usage,
                "unknown reference kind \"" + opts.kind +
                    "\" (expected oracle, subsampled or uniform)");
  }
  spec.subsample_size = opts.k;
  spec.seed = opts.seed;
  spec.sampling = opts.with_replacement ? SamplingMode::WithReplacement
                                        : SamplingMode::WithoutReplacement;
  if (spec.kind == ReferenceKind::SubsampledHuman) {
    if (spec.subsample_size < 1) {
      throw Error(ErrorKind::Usage, "--k must be >= 1 for the subsampled classifier");
    }
    if (!spec.seed.has_value()) {
      throw Error(ErrorKind::Usage, "--seed is required for the subsampled classifier");
    }
  }

  AnnotationData annotations =
      read_annotations(opts.annotations, opts.fmt.annotation_format());
  std::vector<PredictionRecord> predictions = make_reference(annotations, spec);

  fs::path out_path = opts.out.empty()
                          ? fs::path("predictions_" + opts.kind + ".jsonl")
                          : fs::path(opts.out);
  ensure_parent_dir(out_path);
  write_predictions(out_path, predictions);

  json summary;
  summary["type"] = "calev.summary";
  summary["command"] = "reference";
  summary["kind"] = opts.kind;
  summary["n"] = static_cast<std::int64_t>(predictions.size());
  if (spec.kind == ReferenceKind::SubsampledHuman) {
    summary["k"] = spec.subsample_size;
    summary["seed"] = *spec.seed;
    summary["sampling"] = sampling_mode_name(spec.sampling);
  }
  summary["outputs"] = {out_path.string()};

  std::vector<std::string> lines = {
      "generated " + std::to_string(predictions.size()) + " " + opts.kind +
          " predictions",
      "wrote " + out_path.string()};
  print_summary(opts.common.json_output, summary, lines);
  return 0;
}

// ---------------------------------------------------------------- compare

struct CompareOpts {
  CommonOpts common;
  std::vector<std::string> reports;
  std::vector<std::string> names;
  std::string statistic = "dist_ce";
  int hist_bins = 20;
  double epsilon = 1e-6;
  std::string out_dir = ".";
};

int cmd_compare(const CompareOpts& opts) {
  if (opts.reports.size() < 2) {
    throw Error(ErrorKind::Usage, "--reports needs at least two report files");
  }
  if (!opts.names.empty() && opts.names.size() != opts.reports.size()) {
    throw Error(ErrorKind::Usage, "--names must match the number of reports");
  }
  require_positive(opts.hist_bins, "--hist-bins");
  if (!(opts.epsilon >= 0.0)) {
    throw Error(ErrorKind::Usage, "--epsilon must be >= 0");
  }

  std::vector<EvaluationReport> reports;
  reports.reserve(opts.reports.size());
  for (const auto& path : opts.reports) {
    reports.push_back(read_evaluation_report(path));
  }
  for (std::size_t i = 1; i < reports.size(); ++i) {
    if (reports[i].class_count != reports[0].class_count) {
      throw Error(ErrorKind::Validation,
                  "compare: class counts differ between reports (" +
                      opts.reports[0] + " vs " + opts.reports[i] + ")");
    }
    if (reports[i].config.entropy_base != reports[0].config.entropy_base) {
      throw Error(ErrorKind::Validation,
                  "compare: entropy bases differ between reports (" +
                      opts.reports[0] + " vs " + opts.reports[i] + ")");
    }
  }

  std::pair<double, double> range = statistic_range(
      opts.statistic, reports[0].class_count, reports[0].config.entropy_base);

  std::vector<NamedHistogram> histograms;
  histograms.reserve(reports.size());
  for (std::size_t i = 0; i < reports.size(); ++i) {
    NamedHistogram named;
    named.name = opts.names.empty() ? fs::path(opts.reports[i]).stem().string()
                                    : opts.names[i];
    named.histogram = error_histogram(reports[i].per_instance, opts.statistic,
                                      opts.hist_bins, range);
    histograms.push_back(std::move(named));
  }
  HistogramComparison comparison =
      compare_histograms(std::move(histograms), opts.epsilon);

  RunConfig rc;
  rc.command = "compare";
  rc.set("reports", opts.reports);
  rc.set("statistic", opts.statistic);
  rc.set("hist_bins", static_cast<std::int64_t>(opts.hist_bins));
  rc.set("epsilon", opts.epsilon);
  rc.set("out_dir", opts.out_dir);

  ensure_dir(opts.out_dir);
  fs::path histograms_path = fs::path(opts.out_dir) / "histograms.json";
  fs::path divergence_path = fs::path(opts.out_dir) / "divergence.tsv";
  write_text_file(histograms_path, comparison_json(comparison, rc));
  write_text_file(divergence_path, divergence_tsv(comparison));

  json summary;
  summary["type"] = "calev.summary";
  summary["command"] = "compare";
  summary["statistic"] = opts.statistic;
  json pairs = json::array();
  std::vector<std::string> lines = {"compared " + std::to_string(reports.size()) +
                                    " reports on " + opts.statistic};
  for (const auto& pair : comparison.pairs) {
    json entry;
    entry["a"] = pair.a;
    entry["b"] = pair.b;
    entry["kl"] = pair.kl;
    entry["tvd"] = pair.tvd;
    pairs.push_back(std::move(entry));
    lines.push_back("  KL(" + pair.a + " || " + pair.b + ") = " +
                    format_double(pair.kl) + ", TVD = " + format_double(pair.tvd));
  }
  summary["pairs"] = std::move(pairs);
  summary["outputs"] = {histograms_path.string(), divergence_path.string()};
  lines.push_back("wrote " + histograms_path.string());
  lines.push_back("wrote " + divergence_path.string());

  print_summary(opts.common.json_output, summary, lines);
  return 0;
}

// ---------------------------------------------------------------- simulate

struct SimulateOpts {
  CommonOpts common;
  std::int64_t instances = 500;
  std::vector<double> concentration = {1.0, 1.0, 1.0};
  std::string preset;
  std::uint64_t seed = 0;
  std::vector<std::int64_t> vote_sizes = {10, 100, 1000};
  int replicates = 20;
  std::string out_dir = ".";
  bool no_convergence = false;
  std::string emit_annotations;
  std::int64_t annotation_votes = 100;
  std::vector<std::string> labels;
  std::string uid_key = "uid";
  std::string votes_key = "label_counter";
};

int cmd_simulate(const SimulateOpts& opts) {
  std::vector<PopulationInstance> population;
  RunConfig rc;
  rc.command = "simulate";
  rc.set("instances", opts.instances);
  rc.set("seed", static_cast<std::int64_t>(opts.seed));
  rc.set("out_dir", opts.out_dir);

  std::vector<std::string> labels = opts.labels;
  if (!opts.preset.empty()) {
    if (opts.preset != "chaosnli-like") {
      throw Error(ErrorKind::Usage,
                  "unknown preset \"" + opts.preset + "\" (expected chaosnli-like)");
    }
    population = sample_population_preset(opts.instances, opts.seed);
    if (labels.empty()) labels = {"e", "n", "c"};
    rc.set("preset", opts.preset);
  } else {
    PopulationSpec spec;
    spec.instance_count = opts.instances;
    spec.concentration = opts.concentration;
    spec.seed = opts.seed;
    population = sample_population(spec);
    rc.set("concentration", opts.concentration);
  }

  json summary;
  summary["type"] = "calev.summary";
  summary["command"] = "simulate";
  summary["instances"] = opts.instances;
  std::vector<std::string> lines;
  std::vector<std::string> outputs;

  if (!opts.emit_annotations.empty()) {
    if (opts.annotation_votes < 1) {
      throw Error(ErrorKind::Usage, "--annotation-votes must be >= 1");
    }
    AnnotationData data = annotate_population(population, opts.annotation_votes,
                                              opts.seed, labels);
    AnnotationFormat format;
    format.uid_key = opts.uid_key;
    format.votes_key = opts.votes_key;
    format.class_names = data.label_names;
    fs::path path(opts.emit_annotations);
    ensure_parent_dir(path);
    write_annotations(path, data, format);
    rc.set("emit_annotations", opts.emit_annotations);
    rc.set("annotation_votes", opts.annotation_votes);
    outputs.push_back(path.string());
    lines.push_back("wrote " + std::to_string(data.instances.size()) +
                    " synthetic annotations (" +
                    std::to_string(opts.annotation_votes) + " votes each) to " +
                    path.string());
  }

  if (!opts.no_convergence) {
    if (opts.vote_sizes.empty()) {
      throw Error(ErrorKind::Usage, "--vote-sizes must not be empty");
    }
    for (std::int64_t t : opts.vote_sizes) {
      if (t < 1) throw Error(ErrorKind::Usage, "--vote-sizes entries must be >= 1");
    }
    require_positive(opts.replicates, "--replicates");
    rc.set("vote_sizes", opts.vote_sizes);
    rc.set("replicates", static_cast<std::int64_t>(opts.replicates));

    std::vector<ConvergenceRow> rows =
        convergence_study(population, opts.vote_sizes, opts.replicates, opts.seed);
    ensure_dir(opts.out_dir);
    fs::path table_path = fs::path(opts.out_dir) / "convergence.tsv";
    write_text_file(table_path, convergence_tsv(rows));
    outputs.push_back(table_path.string());

    json table = json::array();
    lines.push_back("annotators  mean_tvd  std_tvd");
    for (const auto& row : rows) {
      json entry;
      entry["annotators"] = row.annotator_count;
      entry["mean_tvd"] = row.mean_tvd;
      entry["std_tvd"] = row.std_tvd;
      table.push_back(std::move(entry));
      lines.push_back("  " + std::to_string(row.annotator_count) + "  " +
                      format_double(row.mean_tvd) + "  " +
                      format_double(row.std_tvd));
    }
    summary["convergence"] = std::move(table);
    lines.push_back("wrote " + table_path.string());
  }

  summary["outputs"] = outputs;
  print_summary(opts.common.json_output, summary, lines);
  return 0;
}

// ---------------------------------------------------------------- render

struct RenderOpts {
  CommonOpts common;
  std::string kind;
  std::vector<std::string> inputs;
  std::vector<std::string> names;
  std::string out = "plot.svg";
  std::string statistic = "dist_ce";
  int hist_bins = 20;
};

int cmd_render(const RenderOpts& opts) {
  if (opts.inputs.empty()) {
    throw Error(ErrorKind::Usage, "--input is required");
  }
  std::string svg;

  if (opts.kind == "reliability") {
    if (opts.inputs.size() != 1) {
      throw Error(ErrorKind::Usage, "reliability rendering takes exactly one report");
    }
    svg = render_reliability_svg(read_evaluation_report(opts.inputs[0]));
  } else if (opts.kind == "trace") {
    if (opts.inputs.size() != 1) {
      throw Error(ErrorKind::Usage, "trace rendering takes exactly one search file");
    }
    svg = render_trace_svg(read_search_result(opts.inputs[0]));
  } else if (opts.kind == "error-hist") {
    // Accept either one histogram-comparison document or evaluation reports.
    std::string first_type;
    {
      json value = json::parse(read_text_file(opts.inputs[0]), nullptr, false);
      if (!value.is_discarded() && value.is_object()) {
        first_type = value.value("type", "");
      }
    }
    std::vector<NamedHistogram> histograms;
    if (first_type == "calev.histogram_comparison") {
      if (opts.inputs.size() != 1) {
        throw Error(ErrorKind::Usage,
                    "error-hist rendering takes one comparison file or several reports");
      }
      histograms = read_comparison(opts.inputs[0]).histograms;
    } else {
      if (!opts.names.empty() && opts.names.size() != opts.inputs.size()) {
        throw Error(ErrorKind::Usage, "--names must match the number of inputs");
      }
      require_positive(opts.hist_bins, "--hist-bins");
      std::vector<EvaluationReport> reports;
      for (const auto& path : opts.inputs) {
        reports.push_back(read_evaluation_report(path));
      }
      std::pair<double, double> range = statistic_range(
          opts.statistic, reports[0].class_count, reports[0].config.entropy_base);
      for (std::size_t i = 0; i < reports.size(); ++i) {
        NamedHistogram named;
        named.name = opts.names.empty() ? fs::path(opts.inputs[i]).stem().string()
                                        : opts.names[i];
        named.histogram = error_histogram(reports[i].per_instance, opts.statistic,
                                          opts.hist_bins, range);
        histograms.push_back(std::move(named));
      }
    }
    svg = render_error_histogram_svg(histograms);
  } else {
    throw Error(ErrorKind::Usage,
                "unknown render kind \"" + opts.kind +
                    "\" (expected reliability, error-hist or trace)");
  }

  fs::path out_path(opts.out);
  ensure_parent_dir(out_path);
  write_text_file(out_path, svg);

  json summary;
  summary["type"] = "calev.summary";
  summary["command"] = "render";
  summary["kind"] = opts.kind;
  summary["outputs"] = {out_path.string()};
  print_summary(opts.common.json_output, summary, {"wrote " + out_path.string()});
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Evaluates probabilistic classifiers against distributions of "
               "human annotations",
               "calev"};
  app.set_version_flag("--version", "calev 1.0.0");
  app.require_subcommand(1);

  EvaluateOpts eval_opts;
  CalibrateOpts cal_opts;
  ReferenceOpts ref_opts;
  CompareOpts cmp_opts;
  SimulateOpts sim_opts;
  RenderOpts render_opts;
  Merger eval_merger, cal_merger, ref_merger, cmp_merger, sim_merger, render_merger;

  CLI::App* eval_cmd = app.add_subcommand(
      "evaluate", "Score predictions against human vote distributions");
  add_common(eval_cmd, eval_merger, eval_opts.common);
  bind_value(eval_merger,
             eval_cmd->add_option("--annotations", eval_opts.annotations,
                                  "Annotation JSONL file"),
             "annotations", eval_opts.annotations);
  bind_value(eval_merger,
             eval_cmd->add_option("--predictions", eval_opts.predictions,
                                  "Prediction JSONL file"),
             "predictions", eval_opts.predictions);
  bind_value(eval_merger,
             eval_cmd->add_option("--out-dir", eval_opts.out_dir, "Output directory"),
             "out-dir", eval_opts.out_dir);
  add_annotation_format(eval_cmd, eval_merger, eval_opts.fmt);
  add_prediction_format(eval_cmd, eval_merger, eval_opts.fmt);
  add_eval_core(eval_cmd, eval_merger, eval_opts.core, true);

  CLI::App* cal_cmd = app.add_subcommand(
      "calibrate", "Grid-search the ECE-minimizing softmax temperature");
  add_common(cal_cmd, cal_merger, cal_opts.common);
  bind_value(cal_merger,
             cal_cmd->add_option("--annotations", cal_opts.annotations,
                                 "Annotation JSONL file"),
             "annotations", cal_opts.annotations);
  bind_value(cal_merger,
             cal_cmd->add_option("--predictions", cal_opts.predictions,
                                 "Prediction JSONL file (logits required)"),
             "predictions", cal_opts.predictions);
  bind_value(cal_merger,
             cal_cmd->add_option("--out-dir", cal_opts.out_dir, "Output directory"),
             "out-dir", cal_opts.out_dir);
  add_annotation_format(cal_cmd, cal_merger, cal_opts.fmt);
  add_prediction_format(cal_cmd, cal_merger, cal_opts.fmt);
  add_eval_core(cal_cmd, cal_merger, cal_opts.core, false);
  bind_value(cal_merger,
             cal_cmd->add_option("--t-min", cal_opts.t_min, "Grid lower bound"),
             "t-min", cal_opts.t_min);
  bind_value(cal_merger,
             cal_cmd->add_option("--t-max", cal_opts.t_max, "Grid upper bound"),
             "t-max", cal_opts.t_max);
  bind_value(cal_merger,
             cal_cmd->add_option("--t-step", cal_opts.t_step, "Grid step"),
             "t-step", cal_opts.t_step);
  auto* temp_opt = cal_cmd->add_option("--temperature", cal_opts.temperature,
                                       "Apply this fixed temperature, skip the search");
  cal_merger.bind(temp_opt, "temperature", [&cal_opts](const json& v) {
    cal_opts.temperature = v.get<double>();
  });

  CLI::App* ref_cmd = app.add_subcommand(
      "reference", "Generate oracle, subsampled-human or uniform predictions");
  add_common(ref_cmd, ref_merger, ref_opts.common);
  bind_value(ref_merger,
             ref_cmd->add_option("--annotations", ref_opts.annotations,
                                 "Annotation JSONL file"),
             "annotations", ref_opts.annotations);
  bind_value(ref_merger,
             ref_cmd->add_option("--kind", ref_opts.kind,
                                 "oracle, subsampled or uniform"),
             "kind", ref_opts.kind);
  bind_value(ref_merger,
             ref_cmd->add_option("--out", ref_opts.out,
                                 "Output path (default predictions_<kind>.jsonl)"),
             "out", ref_opts.out);
  bind_value(ref_merger,
             ref_cmd->add_option("--k", ref_opts.k, "Annotators per instance to draw"),
             "k", ref_opts.k);
  auto* seed_opt = ref_cmd->add_option("--seed", ref_opts.seed, "Sampling seed");
  ref_merger.bind(seed_opt, "seed", [&ref_opts](const json& v) {
    ref_opts.seed = v.get<std::uint64_t>();
  });
  auto* wr_opt = ref_cmd->add_flag("--with-replacement", ref_opts.with_replacement,
                                   "Resample votes with replacement");
  bind_value(ref_merger, wr_opt, "with-replacement", ref_opts.with_replacement);
  add_annotation_format(ref_cmd, ref_merger, ref_opts.fmt);

  CLI::App* cmp_cmd = app.add_subcommand(
      "compare", "Compare error distributions across evaluation reports");
  add_common(cmp_cmd, cmp_merger, cmp_opts.common);
  auto* reports_opt = cmp_cmd->add_option("--reports", cmp_opts.reports,
                                          "Two or more report.json files")
                          ->delimiter(',');
  bind_string_list(cmp_merger, reports_opt, "reports", cmp_opts.reports);
  auto* cmp_names = cmp_cmd->add_option("--names", cmp_opts.names,
                                        "Display names, one per report")
                        ->delimiter(',');
  bind_string_list(cmp_merger, cmp_names, "names", cmp_opts.names);
  bind_value(cmp_merger,
             cmp_cmd->add_option("--statistic", cmp_opts.statistic,
                                 "Instance statistic to histogram"),
             "statistic", cmp_opts.statistic);
  bind_value(cmp_merger,
             cmp_cmd->add_option("--hist-bins", cmp_opts.hist_bins,
                                 "Histogram bin count"),
             "hist-bins", cmp_opts.hist_bins);
  bind_value(cmp_merger,
             cmp_cmd->add_option("--epsilon", cmp_opts.epsilon,
                                 "KL smoothing constant"),
             "epsilon", cmp_opts.epsilon);
  bind_value(cmp_merger,
             cmp_cmd->add_option("--out-dir", cmp_opts.out_dir, "Output directory"),
             "out-dir", cmp_opts.out_dir);

  CLI::App* sim_cmd = app.add_subcommand(
      "simulate", "Annotator-sampling studies on synthetic populations");
  add_common(sim_cmd, sim_merger, sim_opts.common);
  bind_value(sim_merger,
             sim_cmd->add_option("--instances", sim_opts.instances,
                                 "Population size"),
             "instances", sim_opts.instances);
  auto* conc_opt = sim_cmd->add_option("--concentration", sim_opts.concentration,
                                       "Dirichlet concentration per class")
                       ->delimiter(',');
  bind_double_list(sim_merger, conc_opt, "concentration", sim_opts.concentration);
  bind_value(sim_merger,
             sim_cmd->add_option("--preset", sim_opts.preset,
                                 "Named population preset (chaosnli-like)"),
             "preset", sim_opts.preset);
  bind_value(sim_merger,
             sim_cmd->add_option("--seed", sim_opts.seed, "Simulation seed"),
             "seed", sim_opts.seed);
  auto* votes_opt = sim_cmd->add_option("--vote-sizes", sim_opts.vote_sizes,
                                        "Annotator counts for the convergence table")
                        ->delimiter(',');
  bind_int_list(sim_merger, votes_opt, "vote-sizes", sim_opts.vote_sizes);
  bind_value(sim_merger,
             sim_cmd->add_option("--replicates", sim_opts.replicates,
                                 "Vote redraws per instance and size"),
             "replicates", sim_opts.replicates);
  bind_value(sim_merger,
             sim_cmd->add_option("--out-dir", sim_opts.out_dir, "Output directory"),
             "out-dir", sim_opts.out_dir);
  auto* noconv_opt = sim_cmd->add_flag("--no-convergence", sim_opts.no_convergence,
                                       "Skip the convergence table");
  bind_value(sim_merger, noconv_opt, "no-convergence", sim_opts.no_convergence);
  bind_value(sim_merger,
             sim_cmd->add_option("--emit-annotations", sim_opts.emit_annotations,
                                 "Also write a synthetic annotation JSONL here"),
             "emit-annotations", sim_opts.emit_annotations);
  bind_value(sim_merger,
             sim_cmd->add_option("--annotation-votes", sim_opts.annotation_votes,
                                 "Votes per emitted instance"),
             "annotation-votes", sim_opts.annotation_votes);
  auto* labels_opt = sim_cmd->add_option("--classes", sim_opts.labels,
                                         "Class names for emitted annotations")
                         ->delimiter(',');
  bind_string_list(sim_merger, labels_opt, "classes", sim_opts.labels);
  bind_value(sim_merger,
             sim_cmd->add_option("--uid-key", sim_opts.uid_key,
                                 "uid field for emitted annotations"),
             "uid-key", sim_opts.uid_key);
  bind_value(sim_merger,
             sim_cmd->add_option("--votes-key", sim_opts.votes_key,
                                 "Vote-count field for emitted annotations"),
             "votes-key", sim_opts.votes_key);

  CLI::App* render_cmd = app.add_subcommand(
      "render", "Render reports as SVG figures");
  add_common(render_cmd, render_merger, render_opts.common);
  bind_value(render_merger,
             render_cmd->add_option("--kind", render_opts.kind,
                                    "reliability, error-hist or trace"),
             "kind", render_opts.kind);
  auto* input_opt = render_cmd->add_option("--input", render_opts.inputs,
                                           "Input document(s)")
                        ->delimiter(',');
  bind_string_list(render_merger, input_opt, "input", render_opts.inputs);
  auto* render_names = render_cmd->add_option("--names", render_opts.names,
                                              "Display names, one per input")
                           ->delimiter(',');
  bind_string_list(render_merger, render_names, "names", render_opts.names);
  bind_value(render_merger,
             render_cmd->add_option("--out", render_opts.out, "Output SVG path"),
             "out", render_opts.out);
  bind_value(render_merger,
             render_cmd->add_option("--statistic", render_opts.statistic,
                                    "Statistic for error-hist from reports"),
             "statistic", render_opts.statistic);
  bind_value(render_merger,
             render_cmd->add_option("--hist-bins", render_opts.hist_bins,
                                    "Histogram bin count"),
             "hist-bins", render_opts.hist_bins);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    emit_error(ErrorKind::Usage, e.what());
    return static_cast<int>(ErrorKind::Usage);
  }

  try {
    auto run = [&](CLI::App* cmd, const Merger& merger, const CommonOpts& common,
                   auto&& body) -> int {
      if (!cmd->parsed()) return -1;
      if (!common.config_path.empty()) {
        merger.apply(load_config_file(common.config_path));
      }
      return body();
    };

    int code;
    if ((code = run(eval_cmd, eval_merger, eval_opts.common,
                    [&] { return cmd_evaluate(eval_opts); })) >= 0) {
      return code;
    }
    if ((code = run(cal_cmd, cal_merger, cal_opts.common,
                    [&] { return cmd_calibrate(cal_opts); })) >= 0) {
      return code;
    }
    if ((code = run(ref_cmd, ref_merger, ref_opts.common,
                    [&] { return cmd_reference(ref_opts); })) >= 0) {
      return code;
    }
    if ((code = run(cmp_cmd, cmp_merger, cmp_opts.common,
                    [&] { return cmd_compare(cmp_opts); })) >= 0) {
      return code;
    }
    if ((code = run(sim_cmd, sim_merger, sim_opts.common,
                    [&] { return cmd_simulate(sim_opts); })) >= 0) {
      return code;
    }
    if ((code = run(render_cmd, render_merger, render_opts.common,
                    [&] { return cmd_render(render_opts); })) >= 0) {
      return code;
    }
    emit_error(ErrorKind::Usage, "no subcommand given");
    return static_cast<int>(ErrorKind::Usage);
  } catch (const Error& e) {
    emit_error(e.kind(), e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    emit_error(ErrorKind::Computation, std::string("internal error: ") + e.what());
    return 70;
  }
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("calev");
  for (const auto& arg : args) argv.push_back(arg.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace calev
