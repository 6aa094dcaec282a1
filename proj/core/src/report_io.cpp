#include "calev/report_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <system_error>

#include <json.hpp>

#include "calev/error.hpp"

namespace calev {

using nlohmann::json;

void RunConfig::set(const std::string& key, ConfigValue value) {
  entries[key] = std::move(value);
}

std::string format_double(double value) {
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc{}) {
    throw Error(ErrorKind::Computation, "cannot format floating-point value");
  }
  return std::string(buffer, ptr);
}

namespace {

json config_json(const RunConfig& config) {
  json out;
  out["command"] = config.command;
  for (const auto& [key, value] : config.entries) {
    std::visit([&](const auto& v) { out[key] = v; }, value);
  }
  return out;
}

json bins_json(const ReliabilityBins& bins) {
  json out;
  out["bin_count"] = bins.bin_count;
  out["total"] = bins.total;
  json rows = json::array();
  for (int m = 0; m < bins.bin_count; ++m) {
    json row;
    row["lower"] = bins.lower_edge(m);
    row["upper"] = bins.upper_edge(m);
    row["count"] = bins.counts[m];
    if (bins.counts[m] > 0) {
      row["confidence"] = bins.mean_confidence(m);
      row["accuracy"] = bins.mean_accuracy(m);
    }
    rows.push_back(std::move(row));
  }
  out["bins"] = std::move(rows);
  return out;
}

ReliabilityBins bins_from_json(const json& value) {
  ReliabilityBins bins;
  bins.bin_count = value.at("bin_count").get<int>();
  bins.total = value.at("total").get<std::int64_t>();
  bins.counts.assign(bins.bin_count, 0);
  bins.confidence_sums.assign(bins.bin_count, 0.0);
  bins.correct_counts.assign(bins.bin_count, 0);
  const json& rows = value.at("bins");
  for (int m = 0; m < bins.bin_count; ++m) {
    const json& row = rows.at(m);
    bins.counts[m] = row.at("count").get<std::int64_t>();
    if (bins.counts[m] > 0) {
      // Sums are rebuilt from the stored means; derived aggregates agree
      // with the originals to within an ulp.
      bins.confidence_sums[m] =
          row.at("confidence").get<double>() * static_cast<double>(bins.counts[m]);
      bins.correct_counts[m] = static_cast<std::int64_t>(std::llround(
          row.at("accuracy").get<double>() * static_cast<double>(bins.counts[m])));
    }
  }
  return bins;
}

json parse_json_file(const std::filesystem::path& path, const char* expected_type) {
  std::string text = read_text_file(path);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded() || !value.is_object()) {
    throw Error(ErrorKind::Validation, path.string() + ": not a JSON object");
  }
  if (value.value("type", "") != expected_type) {
    throw Error(ErrorKind::Validation,
                path.string() + ": expected a \"" + expected_type + "\" document");
  }
  return value;
}

}  // namespace

std::string evaluation_report_json(const EvaluationReport& report,
                                   const RunConfig& config) {
  json out;
  out["type"] = "calev.evaluation_report";
  json cfg = config_json(config);
  cfg["bins"] = report.config.bins.bin_count;
  cfg["binning"] = "equal-width";
  cfg["entropy_base"] = entropy_base_name(report.config.entropy_base);
  cfg["tie_rule"] = tie_rule_name(report.config.tie_rule);
  cfg["rank_mode"] = rank_mode_name(report.config.rank_mode);
  out["config"] = std::move(cfg);

  out["n"] = report.n;
  out["class_count"] = report.class_count;
  out["label_names"] = report.label_names;

  json metrics;
  metrics["accuracy"] = report.accuracy;
  metrics["ece"] = report.ece;
  metrics["classwise_ece"] = report.classwise_ece;
  metrics["rank_cs"] = report.rank_cs;
  metrics["mean_ent_ce"] = report.mean_ent_ce;
  metrics["mean_abs_ent_ce"] = report.mean_abs_ent_ce;
  metrics["mean_dist_ce"] = report.mean_dist_ce;
  out["metrics"] = std::move(metrics);

  out["reliability"] = bins_json(report.reliability);
  json classwise = json::array();
  for (const auto& bins : report.classwise_reliability) {
    classwise.push_back(bins_json(bins));
  }
  out["classwise_reliability"] = std::move(classwise);

  json rows = json::array();
  for (const auto& m : report.per_instance) {
    json row;
    row["uid"] = m.uid;
    row["ent_ce"] = m.ent_ce;
    row["abs_ent_ce"] = m.abs_ent_ce;
    row["dist_ce"] = m.dist_ce;
    row["rank_match"] = m.rank_match;
    row["correct"] = m.correct;
    row["confidence"] = m.confidence;
    row["model_entropy"] = m.model_entropy;
    row["human_entropy"] = m.human_entropy;
    row["per_class_abs_error"] = m.per_class_abs_error;
    rows.push_back(std::move(row));
  }
  out["per_instance"] = std::move(rows);

  return out.dump(2) + "\n";
}

EvaluationReport read_evaluation_report(const std::filesystem::path& path) {
  json value = parse_json_file(path, "calev.evaluation_report");
  EvaluationReport report;
  try {
    report.n = value.at("n").get<std::int64_t>();
    report.class_count = value.at("class_count").get<int>();
    report.label_names = value.at("label_names").get<std::vector<std::string>>();

    const json& cfg = value.at("config");
    report.config.bins.bin_count = cfg.at("bins").get<int>();
    report.config.entropy_base = cfg.value("entropy_base", "nats") == std::string("bits")
                                     ? EntropyBase::Bits
                                     : EntropyBase::Nats;
    report.config.rank_mode = cfg.value("rank_mode", "strict") == std::string("lenient")
                                  ? RankMode::Lenient
                                  : RankMode::Strict;
    report.config.tie_rule = TieRule::LowestIndex;

    const json& metrics = value.at("metrics");
    report.accuracy = metrics.at("accuracy").get<double>();
    report.ece = metrics.at("ece").get<double>();
    report.classwise_ece = metrics.at("classwise_ece").get<double>();
    report.rank_cs = metrics.at("rank_cs").get<double>();
    report.mean_ent_ce = metrics.at("mean_ent_ce").get<double>();
    report.mean_abs_ent_ce = metrics.at("mean_abs_ent_ce").get<double>();
    report.mean_dist_ce = metrics.at("mean_dist_ce").get<double>();

    report.reliability = bins_from_json(value.at("reliability"));
    for (const json& bins : value.at("classwise_reliability")) {
      report.classwise_reliability.push_back(bins_from_json(bins));
    }

    for (const json& row : value.at("per_instance")) {
      InstanceMetrics m;
      m.uid = row.at("uid").get<std::string>();
      m.ent_ce = row.at("ent_ce").get<double>();
      m.abs_ent_ce = row.at("abs_ent_ce").get<double>();
      m.dist_ce = row.at("dist_ce").get<double>();
      m.rank_match = row.at("rank_match").get<bool>();
      m.correct = row.at("correct").get<bool>();
      m.confidence = row.at("confidence").get<double>();
      m.model_entropy = row.at("model_entropy").get<double>();
      m.human_entropy = row.at("human_entropy").get<double>();
      m.per_class_abs_error = row.at("per_class_abs_error").get<std::vector<double>>();
      report.per_instance.push_back(std::move(m));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Validation,
                path.string() + ": malformed evaluation report: " + e.what());
  }
  return report;
}

std::string per_instance_tsv(const EvaluationReport& report) {
  std::string out =
      "uid\tent_ce\tabs_ent_ce\tdist_ce\trank_match\tcorrect\tconfidence"
      "\tmodel_entropy\thuman_entropy";
  for (int c = 0; c < report.class_count; ++c) {
    out += "\tabs_err_" + std::to_string(c);
  }
  out += '\n';
  for (const auto& m : report.per_instance) {
    out += m.uid;
    out += '\t';
    out += format_double(m.ent_ce);
    out += '\t';
    out += format_double(m.abs_ent_ce);
    out += '\t';
    out += format_double(m.dist_ce);
    out += '\t';
    out += m.rank_match ? '1' : '0';
    out += '\t';
    out += m.correct ? '1' : '0';
    out += '\t';
    out += format_double(m.confidence);
    out += '\t';
    out += format_double(m.model_entropy);
    out += '\t';
    out += format_double(m.human_entropy);
    for (double v : m.per_class_abs_error) {
      out += '\t';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

std::string search_result_json(const TemperatureSearchResult& result,
                               const RunConfig& config) {
  json out;
  out["type"] = "calev.temperature_search";
  out["config"] = config_json(config);
  out["best_t"] = result.best.value;
  out["best_ece"] = result.best_ece;
  json trace = json::array();
  for (const auto& [t, value] : result.trace) {
    json row;
    row["t"] = t;
    row["ece"] = value;
    trace.push_back(std::move(row));
  }
  out["trace"] = std::move(trace);
  return out.dump(2) + "\n";
}

TemperatureSearchResult read_search_result(const std::filesystem::path& path) {
  json value = parse_json_file(path, "calev.temperature_search");
  TemperatureSearchResult result;
  try {
    result.best = Temperature{value.at("best_t").get<double>()};
    result.best_ece = value.at("best_ece").get<double>();
    for (const json& row : value.at("trace")) {
      result.trace.emplace_back(row.at("t").get<double>(),
                                row.at("ece").get<double>());
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Validation,
                path.string() + ": malformed temperature search: " + e.what());
  }
  return result;
}

std::string trace_tsv(const TemperatureSearchResult& result) {
  std::string out = "t\tece\n";
  for (const auto& [t, value] : result.trace) {
    out += format_double(t);
    out += '\t';
    out += format_double(value);
    out += '\n';
  }
  return out;
}

namespace {

json histogram_json(const ErrorHistogram& histogram) {
  json out;
  out["statistic"] = histogram.statistic;
  out["edges"] = histogram.edges;
  out["counts"] = histogram.counts;
  out["total"] = histogram.total;
  return out;
}

ErrorHistogram histogram_from_json(const json& value) {
  ErrorHistogram histogram;
  histogram.statistic = value.at("statistic").get<std::string>();
  histogram.edges = value.at("edges").get<std::vector<double>>();
  histogram.counts = value.at("counts").get<std::vector<std::int64_t>>();
  histogram.total = value.at("total").get<std::int64_t>();
  return histogram;
}

}  // namespace

std::string comparison_json(const HistogramComparison& comparison,
                            const RunConfig& config) {
  json out;
  out["type"] = "calev.histogram_comparison";
  out["config"] = config_json(config);
  out["statistic"] = comparison.statistic;
  out["epsilon"] = comparison.epsilon;
  json histograms = json::array();
  for (const auto& named : comparison.histograms) {
    json entry = histogram_json(named.histogram);
    entry["name"] = named.name;
    histograms.push_back(std::move(entry));
  }
  out["histograms"] = std::move(histograms);
  json pairs = json::array();
  for (const auto& pair : comparison.pairs) {
    json entry;
    entry["a"] = pair.a;
    entry["b"] = pair.b;
    entry["kl"] = pair.kl;
    entry["tvd"] = pair.tvd;
    pairs.push_back(std::move(entry));
  }
  out["pairs"] = std::move(pairs);
  return out.dump(2) + "\n";
}

HistogramComparison read_comparison(const std::filesystem::path& path) {
  json value = parse_json_file(path, "calev.histogram_comparison");
  HistogramComparison comparison;
  try {
    comparison.statistic = value.at("statistic").get<std::string>();
    comparison.epsilon = value.at("epsilon").get<double>();
    for (const json& entry : value.at("histograms")) {
      NamedHistogram named;
      named.name = entry.at("name").get<std::string>();
      named.histogram = histogram_from_json(entry);
      comparison.histograms.push_back(std::move(named));
    }
    for (const json& entry : value.at("pairs")) {
      comparison.pairs.push_back({entry.at("a").get<std::string>(),
                                  entry.at("b").get<std::string>(),
                                  entry.at("kl").get<double>(),
                                  entry.at("tvd").get<double>()});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Validation,
                path.string() + ": malformed histogram comparison: " + e.what());
  }
  return comparison;
}

std::string divergence_tsv(const HistogramComparison& comparison) {
  std::string out = "a\tb\tkl\ttvd\n";
  for (const auto& pair : comparison.pairs) {
    out += pair.a;
    out += '\t';
    out += pair.b;
    out += '\t';
    out += format_double(pair.kl);
    out += '\t';
    out += format_double(pair.tvd);
    out += '\n';
  }
  return out;
}

std::string convergence_tsv(std::span<const ConvergenceRow> rows) {
  std::string out = "annotators\tmean_tvd\tstd_tvd\n";
  for (const auto& row : rows) {
    out += std::to_string(row.annotator_count);
    out += '\t';
    out += format_double(row.mean_tvd);
    out += '\t';
    out += format_double(row.std_tvd);
    out += '\n';
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::filesystem::path temp = path;
  temp += ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error(ErrorKind::Validation, "cannot write file: " + temp.string());
    }
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) {
      throw Error(ErrorKind::Validation, "cannot write file: " + temp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(temp, path, ec);
  if (ec) {
    throw Error(ErrorKind::Validation,
                "cannot move " + temp.string() + " into place: " + ec.message());
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::Validation, "cannot open file: " + path.string());
  }
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return text;
}

}  // namespace calev
