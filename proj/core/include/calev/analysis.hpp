#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "calev/dataset.hpp"
#include "calev/metrics.hpp"
#include "calev/probability.hpp"
#include "calev/rng.hpp"

namespace calev {

// Instance statistics that can be histogrammed from a saved report:
// dist_ce, ent_ce, abs_ent_ce, confidence, model_entropy, human_entropy,
// and per-class absolute error as "abs_err_<k>".
double statistic_value(const InstanceMetrics& metrics, const std::string& statistic);

// Natural range of a statistic: [0,1] for dist_ce/confidence/abs_err_k,
// [0, log C] for entropies and abs_ent_ce, [-log C, log C] for ent_ce.
std::pair<double, double> statistic_range(const std::string& statistic,
                                          int class_count, EntropyBase base);

// Binned empirical distribution of one statistic over a dataset's
// instances. Equal-width bins; values at the lower edge land in the first
// bin, everything else is left-open right-closed, values at the upper edge
// land in the last bin.
struct ErrorHistogram {
  std::string statistic;
  std::vector<double> edges;          // bin_count + 1, strictly increasing
  std::vector<std::int64_t> counts;
  std::int64_t total = 0;

  int bin_count() const { return static_cast<int>(counts.size()); }
  std::vector<double> frequencies() const;
};

ErrorHistogram error_histogram(std::span<const InstanceMetrics> instances,
                               const std::string& statistic, int bin_count,
                               std::pair<double, double> range);

struct HistogramDivergence {
  double kl = 0.0;   // KL(a || b) over bin frequencies, epsilon-smoothed
  double tvd = 0.0;
};

// Requires identical bin edges; epsilon as in kl_divergence.
HistogramDivergence histogram_divergence(const ErrorHistogram& a,
                                         const ErrorHistogram& b,
                                         double epsilon = 1e-6);

struct NamedHistogram {
  std::string name;
  ErrorHistogram histogram;
};

// Histograms of one statistic across several runs plus all ordered-pair
// divergences (KL is asymmetric, so both directions are kept).
struct HistogramComparison {
  std::string statistic;
  double epsilon = 1e-6;
  std::vector<NamedHistogram> histograms;

  struct PairDivergence {
    std::string a;
    std::string b;
    double kl = 0.0;
    double tvd = 0.0;
  };
  std::vector<PairDivergence> pairs;
};

HistogramComparison compare_histograms(std::vector<NamedHistogram> histograms,
                                       double epsilon = 1e-6);

// A synthetic population of true per-instance label distributions.
struct PopulationInstance {
  std::string uid;
  ProbabilityVector true_dist;
};

// Single-Dirichlet population. Each instance draws from its own
// (seed, fnv1a(uid)) substream, so populations of different sizes share
// their common prefix.
struct PopulationSpec {
  std::int64_t instance_count = 0;
  std::vector<double> concentration;  // one per class, all > 0
  std::uint64_t seed = 0;
};

std::vector<PopulationInstance> sample_population(const PopulationSpec& spec);

// Mixture population shaped like the high-disagreement NLI corpora: 42%
// near-one-hot Dirichlet(0.05,0.05,0.05), 55% permuted Dirichlet(6.5,3.5,0.2)
// two-way splits, 3% broad Dirichlet(2,2,2), then a screening step that
// draws 5 noisy votes (half true distribution, half uniform) and keeps the
// instance iff no label got more than 3. Three classes.
std::vector<PopulationInstance> sample_population_preset(std::int64_t instance_count,
                                                         std::uint64_t seed);

// T annotator votes drawn iid from the true distribution.
VoteCounts sample_votes(const ProbabilityVector& true_dist,
                        std::int64_t annotator_count, RandomStream& stream);

// Materializes a population as an annotation collection with
// votes_per_instance votes each. label_names are "c0", "c1", ... unless
// given.
AnnotationData annotate_population(std::span<const PopulationInstance> population,
                                   std::int64_t votes_per_instance,
                                   std::uint64_t seed,
                                   std::vector<std::string> label_names = {});

struct ConvergenceRow {
  std::int64_t annotator_count = 0;
  double mean_tvd = 0.0;
  double std_tvd = 0.0;  // population standard deviation across draws
};

// Mean TVD between the empirical vote distribution and the true one, for
// each annotator count, averaged over replicates x instances. Vote draws
// use (seed, fnv1a(uid), replicate) substreams redrawn per annotator count,
// so row r is unaffected by which other rows are requested.
std::vector<ConvergenceRow> convergence_study(
    std::span<const PopulationInstance> population,
    std::span<const std::int64_t> annotator_counts, int replicates,
    std::uint64_t seed);

}  // namespace calev
