#include "calev/svg.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>

#include "calev/error.hpp"

namespace calev {

namespace {

// Fixed two-decimal coordinates keep documents byte-identical for equal
// inputs and independent of locale.
std::string fmt(double value, int precision = 2) {
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value,
                                 std::chars_format::fixed, precision);
  if (ec != std::errc{}) {
    throw Error(ErrorKind::Computation, "cannot format SVG coordinate");
  }
  return std::string(buffer, ptr);
}

constexpr double kWidth = 560.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 62.0;
constexpr double kRight = 20.0;
constexpr double kTop = 34.0;
constexpr double kBottom = 52.0;

constexpr const char* kPalette[6] = {"#1f77b4", "#d62728", "#2ca02c",
                                     "#9467bd", "#ff7f0e", "#8c564b"};

struct Plot {
  std::string body;
  double x_min, x_max, y_min, y_max;

  Plot(double x_lo, double x_hi, double y_lo, double y_hi)
      : x_min(x_lo), x_max(x_hi), y_min(y_lo), y_max(y_hi) {}

  double sx(double x) const {
    return kLeft + (x - x_min) / (x_max - x_min) * (kWidth - kLeft - kRight);
  }
  double sy(double y) const {
    return kHeight - kBottom -
           (y - y_min) / (y_max - y_min) * (kHeight - kTop - kBottom);
  }

  void line(double x1, double y1, double x2, double y2, const std::string& style) {
    body += "<line x1=\"" + fmt(sx(x1)) + "\" y1=\"" + fmt(sy(y1)) + "\" x2=\"" +
            fmt(sx(x2)) + "\" y2=\"" + fmt(sy(y2)) + "\" " + style + "/>\n";
  }
  void rect(double x1, double y1, double x2, double y2, const std::string& style) {
    double px = sx(x1);
    double py = sy(y2);
    body += "<rect x=\"" + fmt(px) + "\" y=\"" + fmt(py) + "\" width=\"" +
            fmt(sx(x2) - px) + "\" height=\"" + fmt(sy(y1) - py) + "\" " + style +
            "/>\n";
  }
  void text(double px, double py, const std::string& anchor, const std::string& s,
            const std::string& extra = "") {
    body += "<text x=\"" + fmt(px) + "\" y=\"" + fmt(py) + "\" text-anchor=\"" +
            anchor + "\" font-size=\"12\"" + (extra.empty() ? "" : " " + extra) +
            ">" + s + "</text>\n";
  }

  void axes(const std::string& x_label, const std::string& y_label, int x_ticks,
            int y_ticks, int tick_precision) {
    const std::string style = "stroke=\"#333333\" stroke-width=\"1\"";
    line(x_min, y_min, x_max, y_min, style);
    line(x_min, y_min, x_min, y_max, style);
    for (int i = 0; i <= x_ticks; ++i) {
      double x = x_min + (x_max - x_min) * i / x_ticks;
      double px = sx(x);
      body += "<line x1=\"" + fmt(px) + "\" y1=\"" + fmt(sy(y_min)) + "\" x2=\"" +
              fmt(px) + "\" y2=\"" + fmt(sy(y_min) + 5.0) + "\" " + style + "/>\n";
      text(px, sy(y_min) + 18.0, "middle", fmt(x, tick_precision));
    }
    for (int i = 0; i <= y_ticks; ++i) {
      double y = y_min + (y_max - y_min) * i / y_ticks;
      double py = sy(y);
      body += "<line x1=\"" + fmt(sx(x_min)) + "\" y1=\"" + fmt(py) + "\" x2=\"" +
              fmt(sx(x_min) - 5.0) + "\" y2=\"" + fmt(py) + "\" " + style + "/>\n";
      text(sx(x_min) - 9.0, py + 4.0, "end", fmt(y, tick_precision));
    }
    text((kLeft + kWidth - kRight) / 2.0, kHeight - 12.0, "middle", x_label);
    body += "<text x=\"16\" y=\"" + fmt((kTop + kHeight - kBottom) / 2.0) +
            "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 " +
            fmt((kTop + kHeight - kBottom) / 2.0) + ")\">" + y_label + "</text>\n";
  }

  std::string document(const std::string& title) const {
    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kWidth, 0) +
           "\" height=\"" + fmt(kHeight, 0) + "\" viewBox=\"0 0 " + fmt(kWidth, 0) +
           " " + fmt(kHeight, 0) + "\" font-family=\"sans-serif\">\n";
    out += "<rect x=\"0\" y=\"0\" width=\"" + fmt(kWidth, 0) + "\" height=\"" +
           fmt(kHeight, 0) + "\" fill=\"#ffffff\"/>\n";
    out += "<text x=\"" + fmt(kWidth / 2.0) +
           "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\" font-weight=\"bold\">" +
           title + "</text>\n";
    out += body;
    out += "</svg>\n";
    return out;
  }
};

std::string escape_text(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += ch;
    }
  }
  return out;
}

}  // namespace

std::string render_reliability_svg(const EvaluationReport& report) {
  const ReliabilityBins& bins = report.reliability;
  Plot plot(0.0, 1.0, 0.0, 1.0);

  for (int m = 0; m < bins.bin_count; ++m) {
    if (bins.counts[m] == 0) continue;  // rendered as a gap
    double lo = bins.lower_edge(m);
    double hi = bins.upper_edge(m);
    plot.rect(lo + 0.004, 0.0, hi - 0.004, bins.mean_accuracy(m),
              "fill=\"#1f77b4\" fill-opacity=\"0.75\"");
    // Mean-confidence marker inside the bar's column.
    double conf = bins.mean_confidence(m);
    plot.line(lo + 0.004, conf, hi - 0.004, conf,
              "stroke=\"#d62728\" stroke-width=\"2\"");
  }
  plot.line(0.0, 0.0, 1.0, 1.0,
            "stroke=\"#555555\" stroke-width=\"1\" stroke-dasharray=\"5,4\"");
  plot.axes("confidence", "accuracy", 5, 5, 1);
  plot.text(kWidth - kRight, kTop + 2.0, "end",
            "ECE = " + fmt(report.ece, 4) + ", N = " + std::to_string(report.n) +
                ", M = " + std::to_string(bins.bin_count));
  plot.text(kWidth - kRight, kTop + 18.0, "end",
            "bars: accuracy, marks: confidence");
  return plot.document("Reliability diagram");
}

std::string render_error_histogram_svg(std::span<const NamedHistogram> histograms) {
  if (histograms.empty()) {
    throw Error(ErrorKind::Usage, "histogram rendering: nothing to draw");
  }
  const ErrorHistogram& first = histograms.front().histogram;
  double y_max = 0.0;
  for (const auto& named : histograms) {
    if (named.histogram.edges != first.edges) {
      throw Error(ErrorKind::Validation,
                  "histogram rendering: bin edges differ between inputs");
    }
    if (named.histogram.statistic != first.statistic) {
      throw Error(ErrorKind::Validation,
                  "histogram rendering: statistics differ between inputs");
    }
    for (double f : named.histogram.frequencies()) y_max = std::max(y_max, f);
  }
  if (y_max == 0.0) y_max = 1.0;
  y_max *= 1.08;

  Plot plot(first.edges.front(), first.edges.back(), 0.0, y_max);
  for (std::size_t h = 0; h < histograms.size(); ++h) {
    const ErrorHistogram& histogram = histograms[h].histogram;
    const std::string color = kPalette[h % 6];
    std::vector<double> freq = histogram.frequencies();
    std::string path = "M" + fmt(plot.sx(histogram.edges.front())) + " " +
                       fmt(plot.sy(0.0));
    for (std::size_t m = 0; m < freq.size(); ++m) {
      path += " L" + fmt(plot.sx(histogram.edges[m])) + " " + fmt(plot.sy(freq[m]));
      path += " L" + fmt(plot.sx(histogram.edges[m + 1])) + " " +
              fmt(plot.sy(freq[m]));
    }
    path += " L" + fmt(plot.sx(histogram.edges.back())) + " " + fmt(plot.sy(0.0));
    plot.body += "<path d=\"" + path + "\" fill=\"none\" stroke=\"" + color +
                 "\" stroke-width=\"2\"/>\n";
    double ly = kTop + 14.0 + 16.0 * static_cast<double>(h);
    plot.body += "<line x1=\"" + fmt(kWidth - kRight - 120.0) + "\" y1=\"" +
                 fmt(ly - 4.0) + "\" x2=\"" + fmt(kWidth - kRight - 104.0) +
                 "\" y2=\"" + fmt(ly - 4.0) + "\" stroke=\"" + color +
                 "\" stroke-width=\"3\"/>\n";
    plot.text(kWidth - kRight - 98.0, ly, "start", escape_text(histograms[h].name));
  }
  plot.axes(escape_text(first.statistic), "frequency", 5, 4, 2);
  return plot.document("Error distribution");
}

std::string render_trace_svg(const TemperatureSearchResult& result) {
  if (result.trace.empty()) {
    throw Error(ErrorKind::Usage, "trace rendering: empty trace");
  }
  double t_lo = result.trace.front().first;
  double t_hi = result.trace.back().first;
  if (t_lo == t_hi) {
    t_lo -= 0.5;
    t_hi += 0.5;
  }
  double y_max = 0.0;
  for (const auto& [t, value] : result.trace) y_max = std::max(y_max, value);
  if (y_max == 0.0) y_max = 1.0;
  y_max *= 1.08;

  Plot plot(t_lo, t_hi, 0.0, y_max);
  std::string path;
  for (std::size_t i = 0; i < result.trace.size(); ++i) {
    path += (i == 0 ? "M" : " L") + fmt(plot.sx(result.trace[i].first)) + " " +
            fmt(plot.sy(result.trace[i].second));
  }
  plot.body += "<path d=\"" + path +
               "\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\"/>\n";
  plot.body += "<circle cx=\"" + fmt(plot.sx(result.best.value)) + "\" cy=\"" +
               fmt(plot.sy(result.best_ece)) +
               "\" r=\"4\" fill=\"#d62728\"/>\n";
  plot.axes("temperature", "ece", 5, 4, 2);
  plot.text(kWidth - kRight, kTop + 2.0, "end",
            "t* = " + fmt(result.best.value, 2) + ", ECE = " +
                fmt(result.best_ece, 4));
  return plot.document("Temperature search");
}

}  // namespace calev
