#pragma once

// Shared test helpers: small dataset builders, generators driven by the
// library's own deterministic stream, scratch directories, and independent
// reference implementations used as oracles against the real ones.

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "calev/dataset.hpp"
#include "calev/metrics.hpp"
#include "calev/probability.hpp"
#include "calev/rng.hpp"

namespace testutil {

inline calev::AlignedInstance instance(std::string uid,
                                       std::vector<std::int64_t> votes,
                                       std::vector<double> probs) {
  calev::AlignedInstance inst;
  inst.uid = std::move(uid);
  inst.votes = calev::VoteCounts::from(std::move(votes));
  inst.human_dist = calev::normalize_votes(inst.votes);
  inst.prediction.uid = inst.uid;
  inst.prediction.probs = calev::ProbabilityVector::from(std::move(probs));
  return inst;
}

// Prediction built from logits; probs set to their exact softmax.
inline calev::AlignedInstance logit_instance(std::string uid,
                                             std::vector<std::int64_t> votes,
                                             std::vector<double> logits) {
  calev::AlignedInstance inst;
  inst.uid = std::move(uid);
  inst.votes = calev::VoteCounts::from(std::move(votes));
  inst.human_dist = calev::normalize_votes(inst.votes);
  inst.prediction.uid = inst.uid;
  inst.prediction.logits = calev::LogitVector::from(std::move(logits));
  inst.prediction.probs = calev::softmax(*inst.prediction.logits);
  return inst;
}

inline calev::AlignedDataset dataset(std::vector<calev::AlignedInstance> instances) {
  calev::AlignedDataset ds;
  ds.class_count = static_cast<int>(instances.front().human_dist.size());
  for (int c = 0; c < ds.class_count; ++c) {
    ds.label_names.push_back("c" + std::to_string(c));
  }
  ds.instances = std::move(instances);
  return ds;
}

inline std::string uid_of(int i) {
  char buffer[16];
  std::snprintf(buffer, sizeof(buffer), "u%04d", i);
  return buffer;
}

inline calev::ProbabilityVector random_simplex(calev::RandomStream& g, int classes) {
  std::vector<double> concentration(classes, 1.0);
  return calev::ProbabilityVector::trusted(g.dirichlet(concentration));
}

inline calev::VoteCounts random_votes(calev::RandomStream& g, int classes,
                                      int max_per_class = 20) {
  for (;;) {
    std::vector<std::int64_t> counts(classes);
    std::int64_t total = 0;
    for (auto& c : counts) {
      c = static_cast<std::int64_t>(g.uniform_below(max_per_class + 1));
      total += c;
    }
    if (total > 0) return calev::VoteCounts::from(std::move(counts));
  }
}

// Random dataset with Dirichlet predictions, unrelated to the votes.
inline calev::AlignedDataset random_dataset(calev::RandomStream& g, int n,
                                            int classes) {
  std::vector<calev::AlignedInstance> instances;
  instances.reserve(n);
  for (int i = 0; i < n; ++i) {
    calev::AlignedInstance inst;
    inst.uid = uid_of(i);
    inst.votes = random_votes(g, classes);
    inst.human_dist = calev::normalize_votes(inst.votes);
    inst.prediction.uid = inst.uid;
    inst.prediction.probs = random_simplex(g, classes);
    instances.push_back(std::move(inst));
  }
  return dataset(std::move(instances));
}

// Predictions identical to the human side, doubles and all.
inline calev::AlignedDataset oracle_dataset(calev::RandomStream& g, int n,
                                            int classes) {
  calev::AlignedDataset ds = random_dataset(g, n, classes);
  for (auto& inst : ds.instances) {
    inst.prediction.probs = inst.human_dist;
    inst.prediction.logits.reset();
  }
  return ds;
}

// Random dataset whose predictions carry logits (normal, scaled).
inline calev::AlignedDataset random_logit_dataset(calev::RandomStream& g, int n,
                                                  int classes) {
  std::vector<calev::AlignedInstance> instances;
  instances.reserve(n);
  for (int i = 0; i < n; ++i) {
    std::vector<double> z(classes);
    for (auto& v : z) v = 2.0 * g.normal();
    instances.push_back(logit_instance(uid_of(i), random_votes(g, classes).counts, z));
  }
  return dataset(std::move(instances));
}

// ------------------------------------------------------------------ oracles

// Brute-force ECE: explicit grouping by bin, direct averaging. Shares only
// the binning rule, which defines what a bin means; everything downstream
// of it is computed independently.
inline double brute_force_ece(const calev::AlignedDataset& ds, int bins) {
  const auto argmax = [](const std::vector<double>& v) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < v.size(); ++c) {
      if (v[c] > v[best]) best = c;
    }
    return best;
  };
  std::vector<std::vector<std::size_t>> groups(bins);
  for (std::size_t i = 0; i < ds.instances.size(); ++i) {
    const auto& p = ds.instances[i].prediction.resolved_probs().values();
    double conf = p[argmax(p)];
    int b = static_cast<int>(std::ceil(conf * bins)) - 1;
    b = std::clamp(b, 0, bins - 1);
    groups[b].push_back(i);
  }
  const double n = static_cast<double>(ds.instances.size());
  double total_gap = 0.0;
  for (const auto& group : groups) {
    if (group.empty()) continue;
    double conf_sum = 0.0;
    double acc_sum = 0.0;
    for (std::size_t i : group) {
      const auto& p = ds.instances[i].prediction.resolved_probs().values();
      const auto& h = ds.instances[i].human_dist.values();
      conf_sum += p[argmax(p)];
      acc_sum += argmax(p) == argmax(h) ? 1.0 : 0.0;
    }
    const double m = static_cast<double>(group.size());
    total_gap += (m / n) * std::abs(acc_sum / m - conf_sum / m);
  }
  return total_gap;
}

inline double brute_force_classwise_ece(const calev::AlignedDataset& ds, int bins) {
  const auto argmax = [](const std::vector<double>& v) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < v.size(); ++c) {
      if (v[c] > v[best]) best = c;
    }
    return best;
  };
  const int classes = ds.class_count;
  const double n = static_cast<double>(ds.instances.size());
  double sum = 0.0;
  for (int k = 0; k < classes; ++k) {
    std::vector<std::vector<std::size_t>> groups(bins);
    for (std::size_t i = 0; i < ds.instances.size(); ++i) {
      double fk = ds.instances[i].prediction.resolved_probs()[k];
      int b = static_cast<int>(std::ceil(fk * bins)) - 1;
      b = std::clamp(b, 0, bins - 1);
      groups[b].push_back(i);
    }
    double gap = 0.0;
    for (const auto& group : groups) {
      if (group.empty()) continue;
      double conf_sum = 0.0;
      double event_sum = 0.0;
      for (std::size_t i : group) {
        conf_sum += ds.instances[i].prediction.resolved_probs()[k];
        const auto& h = ds.instances[i].human_dist.values();
        event_sum += static_cast<int>(argmax(h)) == k ? 1.0 : 0.0;
      }
      const double m = static_cast<double>(group.size());
      gap += (m / n) * std::abs(event_sum / m - conf_sum / m);
    }
    sum += gap;
  }
  return sum / classes;
}

// Max event-probability discrepancy over all 2^C subsets.
inline double powerset_tvd(const calev::ProbabilityVector& p,
                           const calev::ProbabilityVector& q) {
  const std::size_t c = p.size();
  double best = 0.0;
  for (std::uint32_t mask = 1; mask < (1u << c); ++mask) {
    double pp = 0.0;
    double qq = 0.0;
    for (std::size_t i = 0; i < c; ++i) {
      if (mask & (1u << i)) {
        pp += p[i];
        qq += q[i];
      }
    }
    best = std::max(best, std::abs(pp - qq));
  }
  return best;
}

// ------------------------------------------------------------- environment

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("calev_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path file(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace testutil
