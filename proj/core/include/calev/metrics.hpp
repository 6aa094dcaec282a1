#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "calev/dataset.hpp"
#include "calev/probability.hpp"

namespace calev {

// Equal-width binning of [0, 1]: bin 0 is [0, 1/M], every later bin m is
// ((m)/M, (m+1)/M]. A confidence c maps to clamp(ceil(c*M) - 1, 0, M-1).
struct BinningConfig {
  int bin_count = 10;
};

int bin_index(double confidence, int bin_count);

// Accumulated reliability statistics. Means are derived from sums on
// demand; empty bins have no defined confidence or accuracy.
struct ReliabilityBins {
  int bin_count = 0;
  std::vector<std::int64_t> counts;
  std::vector<double> confidence_sums;
  std::vector<std::int64_t> correct_counts;
  std::int64_t total = 0;

  double mean_confidence(int m) const;
  double mean_accuracy(int m) const;
  double lower_edge(int m) const;
  double upper_edge(int m) const;
};

enum class RankMode { Strict, Lenient };
const char* rank_mode_name(RankMode mode);

struct EvalConfig {
  BinningConfig bins{};
  TieRule tie_rule = TieRule::LowestIndex;
  EntropyBase entropy_base = EntropyBase::Nats;
  RankMode rank_mode = RankMode::Strict;
};

// Instance-level calibration readings against the human distribution.
struct InstanceMetrics {
  std::string uid;
  double ent_ce = 0.0;      // H(prediction) - H(human), signed
  double abs_ent_ce = 0.0;
  double dist_ce = 0.0;     // total variation distance
  bool rank_match = false;  // under the configured RankMode
  bool correct = false;     // argmax(prediction) == argmax(human)
  double confidence = 0.0;  // max predicted probability
  double model_entropy = 0.0;
  double human_entropy = 0.0;
  std::vector<double> per_class_abs_error;
};

// Full evaluation output. Every aggregate equals the corresponding
// reduction over per_instance (in ascending-uid order) or over the bins, so
// the report is recomputable from itself.
struct EvaluationReport {
  std::int64_t n = 0;
  int class_count = 0;
  std::vector<std::string> label_names;
  EvalConfig config;

  double accuracy = 0.0;
  double ece = 0.0;
  double classwise_ece = 0.0;
  double rank_cs = 0.0;
  double mean_ent_ce = 0.0;
  double mean_abs_ent_ce = 0.0;
  double mean_dist_ce = 0.0;

  ReliabilityBins reliability;
  std::vector<ReliabilityBins> classwise_reliability;  // one per class
  std::vector<InstanceMetrics> per_instance;           // input order
};

// Fraction of instances whose predicted argmax matches the human argmax.
double accuracy(const AlignedDataset& dataset, TieRule rule = TieRule::LowestIndex);

// Expected calibration error over top-1 confidence plus the bins behind it.
// The scalar is recomputed from the bins' stored means, so serializing and
// re-deriving it from the report reproduces the same double.
struct EceResult {
  double value = 0.0;
  ReliabilityBins bins;
};
EceResult ece(const AlignedDataset& dataset, const BinningConfig& bins = {},
              TieRule rule = TieRule::LowestIndex);

// Classwise ECE: per-class binning of f_k with "human argmax == k" as the
// positive event, averaged over classes.
struct ClasswiseEceResult {
  double value = 0.0;
  std::vector<ReliabilityBins> bins;
};
ClasswiseEceResult classwise_ece(const AlignedDataset& dataset,
                                 const BinningConfig& bins = {},
                                 TieRule rule = TieRule::LowestIndex);

// Entropy calibration error for one instance: H(prediction) - H(human).
double ent_ce(const ProbabilityVector& prediction, const ProbabilityVector& human,
              EntropyBase base = EntropyBase::Nats);

// Distribution calibration error: TVD(prediction, human).
double dist_ce(const ProbabilityVector& prediction, const ProbabilityVector& human);

// Whether the full predicted ranking is consistent with the human one.
// Strict: argsort permutations are identical. Lenient: human probabilities
// are non-increasing along the predicted order.
bool rank_match(const ProbabilityVector& prediction, const ProbabilityVector& human,
                TieRule rule = TieRule::LowestIndex, RankMode mode = RankMode::Strict);

// Fraction of instances with a rank match.
double rank_cs(const AlignedDataset& dataset, TieRule rule = TieRule::LowestIndex,
               RankMode mode = RankMode::Strict);

// Runs everything above in one pass. Errors on an empty dataset.
EvaluationReport evaluate(const AlignedDataset& dataset, const EvalConfig& config = {});

}  // namespace calev
