#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "calev/analysis.hpp"
#include "calev/metrics.hpp"
#include "calev/temperature.hpp"

namespace calev {

// Echo of the effective options of one CLI run, embedded under "config" in
// every emitted report so outputs are self-describing.
using ConfigValue =
    std::variant<bool, std::int64_t, double, std::string, std::vector<std::string>,
                 std::vector<std::int64_t>, std::vector<double>>;

struct RunConfig {
  std::string command;
  std::map<std::string, ConfigValue> entries;

  void set(const std::string& key, ConfigValue value);
};

// All serializers produce byte-deterministic text: JSON with sorted keys and
// shortest round-trip doubles, TSV with shortest round-trip doubles. No
// timestamps, hostnames or other run-varying content.

std::string evaluation_report_json(const EvaluationReport& report,
                                   const RunConfig& config);
EvaluationReport read_evaluation_report(const std::filesystem::path& path);

std::string per_instance_tsv(const EvaluationReport& report);

std::string search_result_json(const TemperatureSearchResult& result,
                               const RunConfig& config);
TemperatureSearchResult read_search_result(const std::filesystem::path& path);
std::string trace_tsv(const TemperatureSearchResult& result);

std::string comparison_json(const HistogramComparison& comparison,
                            const RunConfig& config);
HistogramComparison read_comparison(const std::filesystem::path& path);
std::string divergence_tsv(const HistogramComparison& comparison);

std::string convergence_tsv(std::span<const ConvergenceRow> rows);

// Shortest round-trip decimal rendering of a double (std::to_chars).
std::string format_double(double value);

// Atomic text write: temp file in the target directory, then rename, so a
// failed run never leaves a partial report behind.
void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace calev
