#include "calev/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "calev/error.hpp"

namespace calev {

const char* rank_mode_name(RankMode mode) {
  switch (mode) {
    case RankMode::Strict: return "strict";
    case RankMode::Lenient: return "lenient";
  }
  return "unknown";
}

int bin_index(double confidence, int bin_count) {
  if (bin_count < 1) {
    throw Error(ErrorKind::Usage, "binning: bin count must be positive");
  }
  if (!(confidence >= 0.0) || confidence > 1.0) {
    throw Error(ErrorKind::Validation, "binning: confidence outside [0, 1]");
  }
  int idx = static_cast<int>(std::ceil(confidence * bin_count)) - 1;
  return std::clamp(idx, 0, bin_count - 1);
}

namespace {

ReliabilityBins make_bins(int bin_count) {
  ReliabilityBins bins;
  bins.bin_count = bin_count;
  bins.counts.assign(bin_count, 0);
  bins.confidence_sums.assign(bin_count, 0.0);
  bins.correct_counts.assign(bin_count, 0);
  return bins;
}

void add_observation(ReliabilityBins& bins, double confidence, bool positive) {
  int m = bin_index(confidence, bins.bin_count);
  ++bins.counts[m];
  bins.confidence_sums[m] += confidence;
  if (positive) ++bins.correct_counts[m];
  ++bins.total;
}

// Weighted |accuracy - confidence| gap from the stored per-bin means, the
// same arithmetic a reader of the serialized bins would perform.
double gap_from_bins(const ReliabilityBins& bins, std::int64_t n) {
  double gap = 0.0;
  for (int m = 0; m < bins.bin_count; ++m) {
    if (bins.counts[m] == 0) continue;
    double weight = static_cast<double>(bins.counts[m]) / static_cast<double>(n);
    gap += weight * std::abs(bins.mean_accuracy(m) - bins.mean_confidence(m));
  }
  return gap;
}

// uid-ascending traversal order. Floating-point accumulation follows this
// order everywhere, which makes every aggregate invariant under permutation
// of the input file.
std::vector<std::size_t> uid_sorted_indices(const AlignedDataset& dataset) {
  std::vector<std::size_t> order(dataset.instances.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return dataset.instances[a].uid < dataset.instances[b].uid;
  });
  return order;
}

void require_nonempty(const AlignedDataset& dataset, const char* what) {
  if (dataset.instances.empty()) {
    throw Error(ErrorKind::Computation, std::string(what) + ": dataset is empty");
  }
}

}  // namespace

double ReliabilityBins::mean_confidence(int m) const {
  if (counts[m] == 0) {
    throw Error(ErrorKind::Computation, "reliability bin is empty");
  }
  return confidence_sums[m] / static_cast<double>(counts[m]);
}

double ReliabilityBins::mean_accuracy(int m) const {
  if (counts[m] == 0) {
    throw Error(ErrorKind::Computation, "reliability bin is empty");
  }
  return static_cast<double>(correct_counts[m]) / static_cast<double>(counts[m]);
}

double ReliabilityBins::lower_edge(int m) const {
  return static_cast<double>(m) / bin_count;
}

double ReliabilityBins::upper_edge(int m) const {
  return static_cast<double>(m + 1) / bin_count;
}

double accuracy(const AlignedDataset& dataset, TieRule rule) {
  require_nonempty(dataset, "accuracy");
  std::int64_t correct = 0;
  for (const auto& instance : dataset.instances) {
    correct += argmax_class(instance.prediction.resolved_probs(), rule) ==
               argmax_class(instance.human_dist, rule);
  }
  return static_cast<double>(correct) / static_cast<double>(dataset.size());
}

EceResult ece(const AlignedDataset& dataset, const BinningConfig& config,
              TieRule rule) {
  require_nonempty(dataset, "ece");
  EceResult result;
  result.bins = make_bins(config.bin_count);
  for (std::size_t i : uid_sorted_indices(dataset)) {
    const auto& instance = dataset.instances[i];
    const auto& probs = instance.prediction.resolved_probs();
    int predicted = argmax_class(probs, rule);
    int human = argmax_class(instance.human_dist, rule);
    add_observation(result.bins, probs[predicted], predicted == human);
  }
  result.value = gap_from_bins(result.bins, dataset.size());
  return result;
}

ClasswiseEceResult classwise_ece(const AlignedDataset& dataset,
                                 const BinningConfig& config, TieRule rule) {
  require_nonempty(dataset, "classwise ece");
  const int class_count = dataset.class_count;
  ClasswiseEceResult result;
  result.bins.reserve(class_count);
  for (int k = 0; k < class_count; ++k) {
    result.bins.push_back(make_bins(config.bin_count));
  }
  for (std::size_t i : uid_sorted_indices(dataset)) {
    const auto& instance = dataset.instances[i];
    const auto& probs = instance.prediction.resolved_probs();
    int human = argmax_class(instance.human_dist, rule);
    for (int k = 0; k < class_count; ++k) {
      add_observation(result.bins[k], probs[k], human == k);
    }
  }
  double sum = 0.0;
  for (int k = 0; k < class_count; ++k) {
    sum += gap_from_bins(result.bins[k], dataset.size());
  }
  result.value = sum / class_count;
  return result;
}

double ent_ce(const ProbabilityVector& prediction, const ProbabilityVector& human,
              EntropyBase base) {
  if (prediction.size() != human.size()) {
    throw Error(ErrorKind::Validation, "ent_ce: dimension mismatch");
  }
  return entropy(prediction, base) - entropy(human, base);
}

double dist_ce(const ProbabilityVector& prediction, const ProbabilityVector& human) {
  return tvd(prediction, human);
}

bool rank_match(const ProbabilityVector& prediction, const ProbabilityVector& human,
                TieRule rule, RankMode mode) {
  if (prediction.size() != human.size()) {
    throw Error(ErrorKind::Validation, "rank match: dimension mismatch");
  }
  std::vector<int> predicted_order = argsort_classes(prediction, rule);
  if (mode == RankMode::Strict) {
    return predicted_order == argsort_classes(human, rule);
  }
  // Lenient: the human mass must be non-increasing along the predicted order,
  // so human ties excuse an order flip that strict mode would reject.
  for (std::size_t i = 1; i < predicted_order.size(); ++i) {
    if (human[predicted_order[i - 1]] < human[predicted_order[i]]) return false;
  }
  return true;
}

double rank_cs(const AlignedDataset& dataset, TieRule rule, RankMode mode) {
  require_nonempty(dataset, "rank_cs");
  std::int64_t matches = 0;
  for (const auto& instance : dataset.instances) {
    matches += rank_match(instance.prediction.resolved_probs(), instance.human_dist,
                          rule, mode);
  }
  return static_cast<double>(matches) / static_cast<double>(dataset.size());
}

EvaluationReport evaluate(const AlignedDataset& dataset, const EvalConfig& config) {
  require_nonempty(dataset, "evaluate");
  EvaluationReport report;
  report.n = dataset.size();
  report.class_count = dataset.class_count;
  report.label_names = dataset.label_names;
  report.config = config;

  report.per_instance.reserve(dataset.instances.size());
  for (const auto& instance : dataset.instances) {
    const auto& probs = instance.prediction.resolved_probs();
    InstanceMetrics m;
    m.uid = instance.uid;
    m.model_entropy = entropy(probs, config.entropy_base);
    m.human_entropy = entropy(instance.human_dist, config.entropy_base);
    m.ent_ce = m.model_entropy - m.human_entropy;
    m.abs_ent_ce = std::abs(m.ent_ce);
    m.dist_ce = tvd(probs, instance.human_dist);
    m.rank_match = rank_match(probs, instance.human_dist, config.tie_rule,
                              config.rank_mode);
    int predicted = argmax_class(probs, config.tie_rule);
    m.correct = predicted == argmax_class(instance.human_dist, config.tie_rule);
    m.confidence = probs[predicted];
    m.per_class_abs_error.resize(probs.size());
    for (std::size_t c = 0; c < probs.size(); ++c) {
      m.per_class_abs_error[c] = std::abs(probs[c] - instance.human_dist[c]);
    }
    report.per_instance.push_back(std::move(m));
  }

  std::vector<std::size_t> order = uid_sorted_indices(dataset);
  std::int64_t correct = 0;
  std::int64_t matches = 0;
  double sum_ent = 0.0;
  double sum_abs_ent = 0.0;
  double sum_dist = 0.0;
  for (std::size_t i : order) {
    const auto& m = report.per_instance[i];
    correct += m.correct;
    matches += m.rank_match;
    sum_ent += m.ent_ce;
    sum_abs_ent += m.abs_ent_ce;
    sum_dist += m.dist_ce;
  }
  const double n = static_cast<double>(report.n);
  report.accuracy = static_cast<double>(correct) / n;
  report.rank_cs = static_cast<double>(matches) / n;
  report.mean_ent_ce = sum_ent / n;
  report.mean_abs_ent_ce = sum_abs_ent / n;
  report.mean_dist_ce = sum_dist / n;

  EceResult top = ece(dataset, config.bins, config.tie_rule);
  report.ece = top.value;
  report.reliability = std::move(top.bins);
  ClasswiseEceResult cw = classwise_ece(dataset, config.bins, config.tie_rule);
  report.classwise_ece = cw.value;
  report.classwise_reliability = std::move(cw.bins);

  return report;
}

}  // namespace calev
