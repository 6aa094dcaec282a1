// Acceptance gate: drives the library and the CLI end to end and prints one
// PASS/FAIL line per criterion. Exit status is zero only when every
// criterion holds. Tolerances are pinned here on purpose; loosening them is
// a spec change, not a test fix.
//
// Criteria 1 and 2 prefer a real multi-annotator NLI corpus when one is
// supplied (--chaosnli PATH or CALEV_CHAOSNLI); otherwise they run on the
// bundled synthetic population preset with the same shape (about 1,500
// instances, 100 votes each) and the line says which source was used.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "calev/analysis.hpp"
#include "calev/dataset.hpp"
#include "calev/metrics.hpp"
#include "calev/probability.hpp"
#include "calev/reference.hpp"
#include "calev/rng.hpp"
#include "calev/temperature.hpp"
#include "testutil.hpp"

namespace fs = std::filesystem;
using namespace calev;

namespace {

struct Options {
  std::string cli;
  std::string workdir = "acceptance_work";
  std::string repo_root = ".";
  std::string chaosnli;
};

Options parse_options(int argc, char** argv) {
  Options opts;
  for (int i = 1; i + 1 < argc; i += 2) {
    std::string key = argv[i];
    std::string value = argv[i + 1];
    if (key == "--cli") opts.cli = value;
    else if (key == "--workdir") opts.workdir = value;
    else if (key == "--repo-root") opts.repo_root = value;
    else if (key == "--chaosnli") opts.chaosnli = value;
  }
  if (opts.chaosnli.empty()) {
    if (const char* env = std::getenv("CALEV_CHAOSNLI")) opts.chaosnli = env;
  }
  return opts;
}

struct CheckFailure {
  std::string message;
};

void expect(bool condition, const std::string& message) {
  if (!condition) throw CheckFailure{message};
}

std::string fmt(const char* pattern, double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), pattern, value);
  return buffer;
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2]
                    : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// Shared corpus for criteria 1 and 2: the real file when given, otherwise
// the synthetic preset annotated with 100 votes per instance.
struct Corpus {
  AnnotationData annotations;
  std::string source;
};

Corpus load_corpus(const Options& opts) {
  Corpus corpus;
  if (!opts.chaosnli.empty()) {
    corpus.annotations = read_annotations(opts.chaosnli);
    corpus.source = "ChaosNLI file " + opts.chaosnli;
  } else {
    std::vector<PopulationInstance> population =
        sample_population_preset(1500, 20260815);
    corpus.annotations =
        annotate_population(population, 100, 20260815, {"e", "n", "c"});
    corpus.source = "synthetic preset population (no corpus file supplied)";
  }
  return corpus;
}

std::string criterion_oracle_pathology(const Corpus& corpus) {
  std::vector<PredictionRecord> oracle = oracle_classifier(corpus.annotations);
  AlignedDataset ds = align(corpus.annotations, oracle);
  EvaluationReport report = evaluate(ds, EvalConfig{});

  expect(report.accuracy == 1.0, "oracle accuracy must be exactly 1");
  expect(report.rank_cs == 1.0, "oracle RankCS must be exactly 1");
  expect(report.mean_abs_ent_ce == 0.0, "oracle mean |EntCE| must be exactly 0");
  expect(report.mean_dist_ce == 0.0, "oracle mean DistCE must be exactly 0");
  expect(report.ece >= 0.22 && report.ece <= 0.28,
         "ECE at 10 bins outside 0.25 +/- 0.03: " + fmt("%.4f", report.ece));
  expect(report.classwise_ece >= 0.13 && report.classwise_ece <= 0.19,
         "classwise ECE outside 0.16 +/- 0.03: " + fmt("%.4f", report.classwise_ece));

  std::string sweep;
  for (int m : {5, 10, 15, 20}) {
    EceResult r = ece(ds, BinningConfig{m});
    expect(std::fabs(r.value - report.ece) <= 0.02,
           "ECE should be insensitive to bin count for the oracle");
    sweep += " M=" + std::to_string(m) + ":" + fmt("%.4f", r.value);
  }
  return "source: " + corpus.source + "; n=" + std::to_string(report.n) +
         ", ece=" + fmt("%.4f", report.ece) +
         ", classwise=" + fmt("%.4f", report.classwise_ece) + ", sweep" + sweep;
}

std::string criterion_subsample_stability(const Corpus& corpus) {
  const AnnotationData& ann = corpus.annotations;
  std::pair<double, double> range = statistic_range("dist_ce", ann.class_count(),
                                                    EntropyBase::Nats);
  constexpr int kHistBins = 20;
  constexpr double kEpsilon = 1e-6;

  EvaluationReport uniform_report =
      evaluate(align(ann, uniform_classifier(ann)), EvalConfig{});
  ErrorHistogram uniform_hist =
      error_histogram(uniform_report.per_instance, "dist_ce", kHistBins, range);

  std::vector<double> kls;
  std::vector<double> tvds;
  double min_gap_ratio = std::numeric_limits<double>::infinity();
  for (int s = 0; s < 10; ++s) {
    std::uint64_t seed1 = 1001 + 2 * static_cast<std::uint64_t>(s);
    std::uint64_t seed2 = 1002 + 2 * static_cast<std::uint64_t>(s);
    EvaluationReport r1 = evaluate(
        align(ann, subsampled_human_classifier(ann, 20, seed1)), EvalConfig{});
    EvaluationReport r2 = evaluate(
        align(ann, subsampled_human_classifier(ann, 20, seed2)), EvalConfig{});
    ErrorHistogram h1 =
        error_histogram(r1.per_instance, "dist_ce", kHistBins, range);
    ErrorHistogram h2 =
        error_histogram(r2.per_instance, "dist_ce", kHistBins, range);

    HistogramDivergence within = histogram_divergence(h1, h2, kEpsilon);
    HistogramDivergence gap = histogram_divergence(h1, uniform_hist, kEpsilon);
    kls.push_back(within.kl);
    tvds.push_back(within.tvd);
    expect(gap.kl >= 10.0 * within.kl,
           "KL(H1, uniform) must dominate KL(H1, H2) tenfold; pair " +
               std::to_string(s) + " has " + fmt("%.4f", gap.kl) + " vs " +
               fmt("%.4f", within.kl));
    if (within.kl > 0.0) min_gap_ratio = std::min(min_gap_ratio, gap.kl / within.kl);
  }
  double median_kl = median(kls);
  double median_tvd = median(tvds);
  expect(median_kl <= 0.02, "median KL(H1, H2) too large: " + fmt("%.4f", median_kl));
  expect(median_tvd <= 0.06,
         "median TVD(H1, H2) too large: " + fmt("%.4f", median_tvd));
  return "source: " + corpus.source + "; median KL=" + fmt("%.4f", median_kl) +
         ", median TVD=" + fmt("%.4f", median_tvd) +
         ", min gap ratio=" + fmt("%.1f", min_gap_ratio) + "x over 10 seed pairs";
}

std::string criterion_declared_nonreproducible(const Options& opts) {
  fs::path readme = fs::path(opts.repo_root) / "README.md";
  expect(fs::exists(readme), "README.md not found at " + readme.string());
  std::string text = testutil::slurp(readme);
  for (const char* needle :
       {"0.74", "0.688", "0.611", "2.0", "not reproducible"}) {
    expect(text.find(needle) != std::string::npos,
           std::string("README must mention \"") + needle + "\"");
  }
  return "README declares the model-dependent numbers and marks them not reproducible";
}

std::string criterion_brute_force_equivalence() {
  RandomStream g(424242);
  constexpr int kDatasets = 150;
  double worst = 0.0;
  for (int it = 0; it < kDatasets; ++it) {
    int classes = 2 + static_cast<int>(g.uniform_below(4));
    int n = 1 + static_cast<int>(g.uniform_below(16));
    int bins = 1 + static_cast<int>(g.uniform_below(12));
    AlignedDataset ds = testutil::random_dataset(g, n, classes);
    double fast = ece(ds, BinningConfig{bins}).value;
    double slow = testutil::brute_force_ece(ds, bins);
    worst = std::max(worst, std::fabs(fast - slow));
    expect(std::fabs(fast - slow) <= 1e-12, "ece disagrees with brute force");
    double fast_cw = classwise_ece(ds, BinningConfig{bins}).value;
    double slow_cw = testutil::brute_force_classwise_ece(ds, bins);
    worst = std::max(worst, std::fabs(fast_cw - slow_cw));
    expect(std::fabs(fast_cw - slow_cw) <= 1e-12,
           "classwise ece disagrees with brute force");
  }
  return std::to_string(kDatasets) + " randomized datasets, worst gap " +
         fmt("%.2e", worst) + " (tolerance 1e-12)";
}

std::string criterion_metric_axioms() {
  constexpr int kCases = 1000;

  RandomStream g1(51);
  for (int it = 0; it < kCases; ++it) {
    int classes = 2 + static_cast<int>(g1.uniform_below(5));
    ProbabilityVector p = testutil::random_simplex(g1, classes);
    ProbabilityVector q = testutil::random_simplex(g1, classes);
    ProbabilityVector r = testutil::random_simplex(g1, classes);
    double pq = tvd(p, q);
    expect(pq >= 0.0 && pq <= 1.0, "tvd out of range");
    expect(tvd(p, p) == 0.0, "tvd identity");
    expect(pq == tvd(q, p), "tvd symmetry");
    expect(tvd(p, r) <= pq + tvd(q, r) + 1e-12, "tvd triangle inequality");
    expect(std::fabs(pq - testutil::powerset_tvd(p, q)) <= 1e-12,
           "tvd must equal the subset max-discrepancy definition");
  }

  RandomStream g2(52);
  for (int it = 0; it < kCases; ++it) {
    int classes = 2 + static_cast<int>(g2.uniform_below(5));
    ProbabilityVector p = testutil::random_simplex(g2, classes);
    double h = entropy(p);
    double hmax = std::log(static_cast<double>(classes));
    expect(h >= 0.0 && h <= hmax + 1e-12, "entropy out of range");
    std::vector<double> onehot(classes, 0.0);
    onehot[static_cast<int>(g2.uniform_below(classes))] = 1.0;
    expect(entropy(ProbabilityVector::trusted(onehot)) == 0.0,
           "one-hot entropy must be exactly 0");
    expect(std::fabs(entropy(ProbabilityVector::uniform(classes)) - hmax) <= 1e-12,
           "uniform entropy must be log C");
    expect(kl_divergence(p, testutil::random_simplex(g2, classes), 1e-6) >= 0.0,
           "smoothed KL nonnegativity");
    expect(kl_divergence(p, p, 0.0) == 0.0, "KL(p, p) must be exactly 0");
  }

  RandomStream g3(53);
  for (int it = 0; it < kCases; ++it) {
    int classes = 2 + static_cast<int>(g3.uniform_below(5));
    ProbabilityVector p = testutil::random_simplex(g3, classes);
    ProbabilityVector q = testutil::random_simplex(g3, classes);
    expect(ent_ce(p, q) == -ent_ce(q, p), "EntCE antisymmetry");

    // Relabeling the classes by a common permutation leaves every
    // instance-level metric unchanged.
    std::vector<int> perm(classes);
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = classes - 1; i > 0; --i) {
      std::swap(perm[i], perm[g3.uniform_below(static_cast<std::uint64_t>(i) + 1)]);
    }
    std::vector<double> pv(classes);
    std::vector<double> qv(classes);
    for (int c = 0; c < classes; ++c) {
      pv[perm[c]] = p.values()[c];
      qv[perm[c]] = q.values()[c];
    }
    ProbabilityVector pp = ProbabilityVector::trusted(pv);
    ProbabilityVector qp = ProbabilityVector::trusted(qv);
    expect(std::fabs(tvd(pp, qp) - tvd(p, q)) <= 1e-12,
           "tvd relabeling invariance");
    expect(std::fabs(ent_ce(pp, qp) - ent_ce(p, q)) <= 1e-12,
           "EntCE relabeling invariance");
    expect(rank_match(pp, qp) == rank_match(p, q),
           "strict rank match relabeling invariance");
    expect(rank_match(pp, qp, TieRule::LowestIndex, RankMode::Lenient) ==
               rank_match(p, q, TieRule::LowestIndex, RankMode::Lenient),
           "lenient rank match relabeling invariance");
  }

  RandomStream g4(54);
  for (int it = 0; it < kCases; ++it) {
    int classes = 2 + static_cast<int>(g4.uniform_below(4));
    int n = 1 + static_cast<int>(g4.uniform_below(12));
    AlignedDataset ds = testutil::random_dataset(g4, n, classes);
    expect(accuracy(ds) >= rank_cs(ds), "accuracy must dominate strict RankCS");
    expect(rank_cs(ds) <=
               rank_cs(ds, TieRule::LowestIndex, RankMode::Lenient),
           "strict RankCS must not exceed lenient RankCS");
  }

  // Instance order never changes any aggregate: evaluation reduces in
  // ascending-uid order internally.
  RandomStream g5(55);
  for (int it = 0; it < 100; ++it) {
    AlignedDataset ds = testutil::random_dataset(
        g5, 2 + static_cast<int>(g5.uniform_below(20)),
        2 + static_cast<int>(g5.uniform_below(4)));
    AlignedDataset shuffled = ds;
    for (std::size_t i = shuffled.instances.size(); i > 1; --i) {
      std::swap(shuffled.instances[i - 1],
                shuffled.instances[g5.uniform_below(i)]);
    }
    EvaluationReport a = evaluate(ds, EvalConfig{});
    EvaluationReport b = evaluate(shuffled, EvalConfig{});
    expect(a.ece == b.ece && a.classwise_ece == b.classwise_ece &&
               a.accuracy == b.accuracy && a.rank_cs == b.rank_cs &&
               a.mean_ent_ce == b.mean_ent_ce &&
               a.mean_dist_ce == b.mean_dist_ce,
           "aggregates must be independent of instance order");
  }

  return "tvd axioms, entropy extremes, KL nonnegativity, EntCE antisymmetry, "
         "relabeling and reorder invariance, rank orderings: 1000 cases each";
}

std::string criterion_temperature_invariances() {
  const std::vector<double> ts = {0.1, 0.25, 0.5, 1.0, 2.0, 5.0, 10.0};
  RandomStream g(61);
  for (int it = 0; it < 1000; ++it) {
    int classes = 2 + static_cast<int>(g.uniform_below(5));
    std::vector<double> z(classes);
    for (double& v : z) v = 3.0 * g.normal();
    LogitVector logits = LogitVector::from(z);
    ProbabilityVector base = softmax(logits);
    std::vector<int> order = argsort_classes(base);

    expect(apply_temperature(logits, Temperature::of(1.0)) == base,
           "t = 1 must be the exact identity");

    double previous_entropy = -1.0;
    for (double t : ts) {
      ProbabilityVector scaled = apply_temperature(logits, Temperature::of(t));
      expect(argsort_classes(scaled) == order,
             "temperature must preserve the class ordering");
      double h = entropy(scaled);
      expect(h >= previous_entropy - 1e-12,
             "entropy must be nondecreasing in temperature");
      previous_entropy = h;

      std::vector<double> shifted = z;
      for (double& v : shifted) v += 4.2;
      ProbabilityVector shifted_probs =
          apply_temperature(LogitVector::from(shifted), Temperature::of(t));
      for (int c = 0; c < classes; ++c) {
        expect(std::fabs(shifted_probs.values()[c] - scaled.values()[c]) <= 1e-12,
               "softmax must be invariant to a constant logit shift");
      }
    }
  }

  RandomStream gd(62);
  for (int it = 0; it < 20; ++it) {
    AlignedDataset ds = testutil::random_logit_dataset(
        gd, 20 + static_cast<int>(gd.uniform_below(30)),
        2 + static_cast<int>(gd.uniform_below(4)));
    double acc = accuracy(ds);
    double rank = rank_cs(ds);
    for (double t : {0.5, 2.0, 3.7}) {
      AlignedDataset scaled = scale_dataset(ds, Temperature::of(t));
      expect(accuracy(scaled) == acc, "accuracy must survive scaling unchanged");
      expect(rank_cs(scaled) == rank, "strict RankCS must survive scaling unchanged");
    }
  }
  return "1000 logit vectors x 7 temperatures plus 20 datasets with exact "
         "accuracy/RankCS preservation";
}

std::string criterion_estimator_convergence() {
  PopulationSpec spec;
  spec.instance_count = 500;
  spec.concentration = {1.0, 1.0, 1.0};
  spec.seed = 777;
  std::vector<PopulationInstance> population = sample_population(spec);
  std::vector<std::int64_t> counts = {10, 100, 1000};
  std::vector<ConvergenceRow> rows = convergence_study(population, counts, 20, 777);

  expect(rows.size() == 3, "convergence table must have one row per count");
  expect(rows[0].mean_tvd > rows[1].mean_tvd && rows[1].mean_tvd > rows[2].mean_tvd,
         "mean TVD must strictly decrease with annotator count");
  expect(rows[2].mean_tvd < 0.02,
         "mean TVD at 1000 annotators too large: " + fmt("%.4f", rows[2].mean_tvd));
  return "mean TVD " + fmt("%.4f", rows[0].mean_tvd) + " -> " +
         fmt("%.4f", rows[1].mean_tvd) + " -> " + fmt("%.4f", rows[2].mean_tvd) +
         " across T = 10, 100, 1000 (N = 500, R = 20)";
}

int run_command(const std::string& dir, const std::string& cli,
                const std::string& args, int index) {
  char tag[16];
  std::snprintf(tag, sizeof(tag), "%02d", index);
  std::string command = "cd '" + dir + "' && '" + cli + "' " + args + " > " + tag +
                        ".out 2> " + tag + ".err";
  int status = std::system(command.c_str());
  if (status == -1) return -1;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string criterion_cli_determinism(const Options& opts) {
  expect(!opts.cli.empty(), "no --cli path provided");
  fs::path work = fs::path(opts.workdir) / "determinism";
  fs::remove_all(work);
  fs::create_directories(work / "inputs");

  std::vector<PopulationInstance> population = sample_population_preset(120, 8);
  AnnotationData ann = annotate_population(population, 50, 8, {"e", "n", "c"});
  write_annotations(work / "inputs" / "ann.jsonl", ann);
  RandomStream g(9);
  std::vector<PredictionRecord> predictions;
  for (const auto& inst : ann.instances) {
    PredictionRecord p;
    p.uid = inst.uid;
    std::vector<double> z = {2.0 * g.normal(), 2.0 * g.normal(), 2.0 * g.normal()};
    p.logits = LogitVector::from(z);
    p.probs = softmax(*p.logits);
    predictions.push_back(std::move(p));
  }
  write_predictions(work / "inputs" / "preds.jsonl", predictions);

  const std::vector<std::string> commands = {
      "simulate --preset chaosnli-like --instances 25 --seed 5"
      " --vote-sizes 10,100 --replicates 3 --annotation-votes 40"
      " --emit-annotations sim_ann.jsonl --out-dir sim",
      "reference --annotations ../inputs/ann.jsonl --kind oracle"
      " --out ref_oracle.jsonl",
      "reference --annotations ../inputs/ann.jsonl --kind subsampled --k 20"
      " --seed 9 --out ref_sub.jsonl",
      "reference --annotations ../inputs/ann.jsonl --kind uniform"
      " --out ref_uniform.jsonl",
      "evaluate --annotations ../inputs/ann.jsonl"
      " --predictions ../inputs/preds.jsonl --out-dir eval_model --json",
      "evaluate --annotations ../inputs/ann.jsonl --predictions ref_sub.jsonl"
      " --out-dir eval_sub",
      "calibrate --annotations ../inputs/ann.jsonl"
      " --predictions ../inputs/preds.jsonl --t-min 0.5 --t-max 3.0"
      " --t-step 0.05 --out-dir cal",
      "compare --reports eval_model/report.json --reports eval_sub/report.json"
      " --names model --names subsampled --out-dir cmp",
      "render --kind reliability --input eval_model/report.json"
      " --out reliability.svg",
      "render --kind trace --input cal/search.json --out trace.svg",
      "render --kind error-hist --input cmp/histograms.json --out hist.svg",
  };

  for (const char* run : {"run1", "run2"}) {
    fs::create_directories(work / run);
    for (std::size_t i = 0; i < commands.size(); ++i) {
      int code = run_command((work / run).string(), opts.cli, commands[i],
                             static_cast<int>(i));
      expect(code == 0, std::string(run) + " command " + std::to_string(i) +
                            " exited with " + std::to_string(code) + ": " +
                            commands[i]);
    }
  }

  auto relative_files = [](const fs::path& root) {
    std::vector<std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
      if (entry.is_regular_file()) {
        files.push_back(fs::relative(entry.path(), root).string());
      }
    }
    std::sort(files.begin(), files.end());
    return files;
  };
  std::vector<std::string> files1 = relative_files(work / "run1");
  std::vector<std::string> files2 = relative_files(work / "run2");
  expect(files1 == files2, "the two runs produced different file sets");
  expect(!files1.empty(), "no output files were produced");
  for (const std::string& rel : files1) {
    expect(testutil::slurp(work / "run1" / rel) ==
               testutil::slurp(work / "run2" / rel),
           "file differs between identical runs: " + rel);
  }
  return std::to_string(commands.size()) + " commands, " +
         std::to_string(files1.size()) +
         " output files byte-identical across two runs (SVG and stdout included)";
}

struct Criterion {
  int number;
  std::string name;
  double budget_seconds;  // 0 means no runtime requirement
  std::function<std::string()> body;
};

}  // namespace

int main(int argc, char** argv) {
  Options opts = parse_options(argc, argv);
  fs::create_directories(opts.workdir);

  // A corpus that fails to load must fail criteria 1 and 2 visibly, not
  // abort the whole gate before any line prints.
  Corpus corpus;
  std::string corpus_error;
  try {
    corpus = load_corpus(opts);
  } catch (const std::exception& error) {
    corpus_error = error.what();
  }
  auto with_corpus = [&](const std::function<std::string()>& body) {
    if (!corpus_error.empty()) {
      throw CheckFailure{"corpus failed to load: " + corpus_error};
    }
    return body();
  };

  std::vector<Criterion> criteria = {
      {1, "oracle reference pathology", 5.0,
       [&] { return with_corpus([&] { return criterion_oracle_pathology(corpus); }); }},
      {2, "subsampled-human error-distribution stability", 30.0,
       [&] { return with_corpus([&] { return criterion_subsample_stability(corpus); }); }},
      {3, "model-dependent numbers declared not reproducible", 0.0,
       [&] { return criterion_declared_nonreproducible(opts); }},
      {4, "calibration error matches brute force", 0.0,
       [&] { return criterion_brute_force_equivalence(); }},
      {5, "metric axiom suite", 0.0, [&] { return criterion_metric_axioms(); }},
      {6, "temperature scaling invariances", 0.0,
       [&] { return criterion_temperature_invariances(); }},
      {7, "annotator estimator convergence", 60.0,
       [&] { return criterion_estimator_convergence(); }},
      {8, "CLI byte determinism", 0.0,
       [&] { return criterion_cli_determinism(opts); }},
  };

  int failures = 0;
  for (const Criterion& criterion : criteria) {
    auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool passed = true;
    try {
      detail = criterion.body();
    } catch (const CheckFailure& failure) {
      passed = false;
      detail = failure.message;
    } catch (const std::exception& error) {
      passed = false;
      detail = std::string("unexpected error: ") + error.what();
    }
    double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (passed && criterion.budget_seconds > 0.0 &&
        elapsed > criterion.budget_seconds) {
      passed = false;
      detail = "runtime budget of " + fmt("%.0f", criterion.budget_seconds) +
               "s exceeded; " + detail;
    }
    if (!passed) ++failures;
    std::printf("[%s] criterion %d: %s: %s (%.2fs)\n", passed ? "PASS" : "FAIL",
                criterion.number, criterion.name.c_str(), detail.c_str(), elapsed);
  }
  if (failures > 0) {
    std::printf("acceptance: %d of %zu criteria failed\n", failures,
                criteria.size());
    return 1;
  }
  std::printf("acceptance: all %zu criteria passed\n", criteria.size());
  return 0;
}
