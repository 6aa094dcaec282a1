#pragma once

#include <vector>

#include "calev/dataset.hpp"
#include "calev/metrics.hpp"
#include "calev/probability.hpp"

namespace calev {

// Softmax temperature; positive and finite.
struct Temperature {
  double value = 1.0;

  static Temperature of(double value);
};

// Inclusive grid [t_min, t_max] advanced by step.
struct TemperatureGrid {
  double t_min = 0.1;
  double t_max = 5.0;
  double step = 0.01;

  void validate() const;
  std::vector<double> points() const;
};

struct TemperatureSearchResult {
  Temperature best;
  double best_ece = 0.0;
  std::vector<std::pair<double, double>> trace;  // (t, ece) in grid order
};

// softmax(logits / t). t -> 0 sharpens toward one-hot, t -> inf flattens
// toward uniform; class ordering never changes.
ProbabilityVector apply_temperature(const LogitVector& logits, Temperature t);

// Rescales every prediction's probabilities from its logits. Instances
// without logits raise a Validation error naming the uid. The stored logits
// become logits/t so the softmax(stored logits) == stored probs invariant
// survives a round trip through the native export.
AlignedDataset scale_dataset(const AlignedDataset& dataset, Temperature t);

// Grid search for the ECE-minimizing temperature ("oracle temperature").
// Ties resolve to the smallest t.
TemperatureSearchResult search_oracle_temperature(
    const AlignedDataset& dataset, const TemperatureGrid& grid = {},
    const BinningConfig& bins = {}, TieRule rule = TieRule::LowestIndex);

}  // namespace calev
