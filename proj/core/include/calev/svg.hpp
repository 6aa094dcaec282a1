#pragma once

#include <span>
#include <string>

#include "calev/analysis.hpp"
#include "calev/metrics.hpp"
#include "calev/temperature.hpp"

namespace calev {

// Self-contained SVG renderers. All coordinates run through one fixed-
// precision formatter, so equal inputs produce byte-identical documents.

// Reliability diagram: per-bin accuracy bars against the diagonal, empty
// bins left as gaps, plus an ECE annotation.
std::string render_reliability_svg(const EvaluationReport& report);

// Overlaid step-outline histograms of one statistic, one color per name.
std::string render_error_histogram_svg(std::span<const NamedHistogram> histograms);

// Temperature search trace: ECE over t with the minimizer marked.
std::string render_trace_svg(const TemperatureSearchResult& result);

}  // namespace calev
