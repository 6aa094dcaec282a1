// Microbenchmarks for the hot paths: full evaluation, the distance and
// entropy kernels, subsampling, and the temperature grid search. All inputs
// are synthetic and seeded, so numbers are comparable across runs.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "calev/analysis.hpp"
#include "calev/dataset.hpp"
#include "calev/metrics.hpp"
#include "calev/probability.hpp"
#include "calev/reference.hpp"
#include "calev/rng.hpp"
#include "calev/temperature.hpp"

namespace {

using namespace calev;

AnnotationData make_annotations(std::int64_t n, std::int64_t votes) {
  std::vector<PopulationInstance> population = sample_population_preset(n, 17);
  return annotate_population(population, votes, 17, {"e", "n", "c"});
}

AlignedDataset make_dataset(std::int64_t n) {
  AnnotationData ann = make_annotations(n, 100);
  RandomStream g(18);
  std::vector<PredictionRecord> predictions;
  predictions.reserve(ann.instances.size());
  for (const auto& inst : ann.instances) {
    PredictionRecord p;
    p.uid = inst.uid;
    std::vector<double> z = {2.0 * g.normal(), 2.0 * g.normal(), 2.0 * g.normal()};
    p.logits = LogitVector::from(z);
    p.probs = softmax(*p.logits);
    predictions.push_back(std::move(p));
  }
  return align(ann, predictions);
}

void BM_Evaluate(benchmark::State& state) {
  AlignedDataset ds = make_dataset(state.range(0));
  for (auto _ : state) {
    EvaluationReport report = evaluate(ds, EvalConfig{});
    benchmark::DoNotOptimize(report.ece);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Evaluate)->Arg(200)->Arg(2000);

void BM_Tvd(benchmark::State& state) {
  RandomStream g(19);
  ProbabilityVector p = ProbabilityVector::trusted(g.dirichlet(std::vector<double>(16, 1.0)));
  ProbabilityVector q = ProbabilityVector::trusted(g.dirichlet(std::vector<double>(16, 1.0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(tvd(p, q));
  }
}
BENCHMARK(BM_Tvd);

void BM_Entropy(benchmark::State& state) {
  RandomStream g(20);
  ProbabilityVector p = ProbabilityVector::trusted(g.dirichlet(std::vector<double>(16, 1.0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(entropy(p));
  }
}
BENCHMARK(BM_Entropy);

void BM_Argsort(benchmark::State& state) {
  RandomStream g(21);
  ProbabilityVector p = ProbabilityVector::trusted(g.dirichlet(std::vector<double>(16, 1.0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(argsort_classes(p));
  }
}
BENCHMARK(BM_Argsort);

void BM_Subsample(benchmark::State& state) {
  AnnotationData ann = make_annotations(500, 100);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    std::vector<PredictionRecord> preds =
        subsampled_human_classifier(ann, 20, ++seed);
    benchmark::DoNotOptimize(preds.size());
  }
  state.SetItemsProcessed(state.iterations() * 500);
}
BENCHMARK(BM_Subsample);

void BM_TemperatureSearch(benchmark::State& state) {
  AlignedDataset ds = make_dataset(500);
  TemperatureGrid grid{0.5, 3.0, 0.05};
  for (auto _ : state) {
    TemperatureSearchResult result = search_oracle_temperature(ds, grid);
    benchmark::DoNotOptimize(result.best.value);
  }
}
BENCHMARK(BM_TemperatureSearch);

}  // namespace

BENCHMARK_MAIN();
