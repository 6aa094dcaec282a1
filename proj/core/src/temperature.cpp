#include "calev/temperature.hpp"

#include <cmath>
#include <string>

#include "calev/error.hpp"

namespace calev {

Temperature Temperature::of(double value) {
  if (!std::isfinite(value) || value <= 0.0) {
    throw Error(ErrorKind::Usage, "temperature must be finite and > 0");
  }
  return Temperature{value};
}

void TemperatureGrid::validate() const {
  if (!std::isfinite(t_min) || !std::isfinite(t_max) || !std::isfinite(step)) {
    throw Error(ErrorKind::Usage, "temperature grid: bounds and step must be finite");
  }
  if (t_min <= 0.0) {
    throw Error(ErrorKind::Usage, "temperature grid: t_min must be > 0");
  }
  if (t_max < t_min) {
    throw Error(ErrorKind::Usage, "temperature grid: t_max must be >= t_min");
  }
  if (step <= 0.0) {
    throw Error(ErrorKind::Usage, "temperature grid: step must be > 0");
  }
}

std::vector<double> TemperatureGrid::points() const {
  validate();
  std::vector<double> out;
  for (std::int64_t i = 0;; ++i) {
    double t = t_min + static_cast<double>(i) * step;
    // Tolerate accumulated rounding so t_max itself is always included.
    if (t > t_max + step * 1e-9) break;
    out.push_back(std::min(t, t_max));
  }
  return out;
}

ProbabilityVector apply_temperature(const LogitVector& logits, Temperature t) {
  Temperature::of(t.value);  // revalidate: Temperature is an aggregate
  std::vector<double> scaled(logits.values.size());
  for (std::size_t c = 0; c < scaled.size(); ++c) {
    scaled[c] = logits.values[c] / t.value;
  }
  return softmax(LogitVector{std::move(scaled)});
}

AlignedDataset scale_dataset(const AlignedDataset& dataset, Temperature t) {
  Temperature::of(t.value);
  AlignedDataset scaled = dataset;
  for (auto& instance : scaled.instances) {
    if (!instance.prediction.logits) {
      throw Error(ErrorKind::Validation,
                  "temperature scaling: uid \"" + instance.uid +
                      "\" has no logits; scaling requires them");
    }
    std::vector<double> z = instance.prediction.logits->values;
    for (double& v : z) v /= t.value;
    // Store the divided logits so softmax(stored logits) == stored probs
    // still holds after export and re-read.
    instance.prediction.logits = LogitVector{z};
    instance.prediction.probs = softmax(LogitVector{std::move(z)});
  }
  return scaled;
}

TemperatureSearchResult search_oracle_temperature(const AlignedDataset& dataset,
                                                  const TemperatureGrid& grid,
                                                  const BinningConfig& bins,
                                                  TieRule rule) {
  std::vector<double> points = grid.points();
  TemperatureSearchResult result;
  result.trace.reserve(points.size());
  bool first = true;
  for (double t : points) {
    AlignedDataset scaled = scale_dataset(dataset, Temperature{t});
    double value = ece(scaled, bins, rule).value;
    result.trace.emplace_back(t, value);
    // Strict < keeps the earliest grid point, so ties resolve to smallest t.
    if (first || value < result.best_ece) {
      result.best = Temperature{t};
      result.best_ece = value;
      first = false;
    }
  }
  return result;
}

}  // namespace calev
