#include "calev/probability.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "calev/error.hpp"

namespace calev {

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Usage: return "usage";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Alignment: return "alignment";
    case ErrorKind::Computation: return "computation";
  }
  return "unknown";
}

const char* tie_rule_name(TieRule rule) {
  switch (rule) {
    case TieRule::LowestIndex: return "lowest-index";
  }
  return "unknown";
}

const char* entropy_base_name(EntropyBase base) {
  switch (base) {
    case EntropyBase::Nats: return "nats";
    case EntropyBase::Bits: return "bits";
  }
  return "unknown";
}

VoteCounts VoteCounts::from(std::vector<std::int64_t> counts) {
  if (counts.empty()) {
    throw Error(ErrorKind::Validation, "vote counts: empty class list");
  }
  std::int64_t total = 0;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] < 0) {
      throw Error(ErrorKind::Validation,
                  "vote counts: negative count " + std::to_string(counts[c]) +
                      " for class " + std::to_string(c));
    }
    total += counts[c];
  }
  if (total == 0) {
    throw Error(ErrorKind::Validation, "vote counts: no annotations (total is zero)");
  }
  VoteCounts votes;
  votes.counts = std::move(counts);
  votes.total = total;
  return votes;
}

ProbabilityVector ProbabilityVector::from(std::vector<double> values) {
  if (values.empty()) {
    throw Error(ErrorKind::Validation, "probability vector: empty");
  }
  double sum = 0.0;
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0) {
      throw Error(ErrorKind::Validation,
                  "probability vector: coordinates must be finite and nonnegative");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kProbabilitySumTolerance) {
    throw Error(ErrorKind::Validation,
                "probability vector: sum " + std::to_string(sum) +
                    " deviates from 1 beyond tolerance");
  }
  if (std::abs(sum - 1.0) > kRenormalizationThreshold) {
    for (double& v : values) v /= sum;
  }
  return ProbabilityVector(std::move(values));
}

ProbabilityVector ProbabilityVector::trusted(std::vector<double> values) {
  return ProbabilityVector(std::move(values));
}

ProbabilityVector ProbabilityVector::uniform(int class_count) {
  if (class_count < 1) {
    throw Error(ErrorKind::Usage, "uniform distribution: class count must be positive");
  }
  return ProbabilityVector(std::vector<double>(
      static_cast<std::size_t>(class_count), 1.0 / class_count));
}

LogitVector LogitVector::from(std::vector<double> values) {
  if (values.empty()) {
    throw Error(ErrorKind::Validation, "logit vector: empty");
  }
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::Validation, "logit vector: coordinates must be finite");
    }
  }
  return LogitVector{std::move(values)};
}

ProbabilityVector normalize_votes(const VoteCounts& votes) {
  std::vector<double> probs(votes.counts.size());
  for (std::size_t c = 0; c < probs.size(); ++c) {
    probs[c] = static_cast<double>(votes.counts[c]) / static_cast<double>(votes.total);
  }
  return ProbabilityVector::trusted(std::move(probs));
}

double entropy(const ProbabilityVector& p, EntropyBase base) {
  double h = 0.0;
  for (double v : p.values()) {
    if (v > 0.0) h -= v * std::log(v);
  }
  if (base == EntropyBase::Bits) h /= std::log(2.0);
  return h;
}

namespace {

void require_same_size(const ProbabilityVector& p, const ProbabilityVector& q,
                       const char* what) {
  if (p.size() != q.size()) {
    throw Error(ErrorKind::Validation,
                std::string(what) + ": dimension mismatch (" +
                    std::to_string(p.size()) + " vs " + std::to_string(q.size()) + ")");
  }
}

}  // namespace

double tvd(const ProbabilityVector& p, const ProbabilityVector& q) {
  require_same_size(p, q, "tvd");
  double l1 = 0.0;
  for (std::size_t c = 0; c < p.size(); ++c) {
    l1 += std::abs(p[c] - q[c]);
  }
  return 0.5 * l1;
}

double kl_divergence(const ProbabilityVector& p, const ProbabilityVector& q,
                     double epsilon) {
  require_same_size(p, q, "kl divergence");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw Error(ErrorKind::Usage, "kl divergence: epsilon must be finite and >= 0");
  }
  const std::size_t n = p.size();
  std::vector<double> ps(p.values());
  std::vector<double> qs(q.values());
  if (epsilon > 0.0) {
    double psum = 0.0;
    double qsum = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      ps[c] += epsilon;
      qs[c] += epsilon;
      psum += ps[c];
      qsum += qs[c];
    }
    for (std::size_t c = 0; c < n; ++c) {
      ps[c] /= psum;
      qs[c] /= qsum;
    }
  }
  double kl = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    if (ps[c] == 0.0) continue;
    if (qs[c] == 0.0) {
      throw Error(ErrorKind::Computation,
                  "kl divergence: undefined divergence (zero mass in second "
                  "argument at class " + std::to_string(c) +
                  " where first argument has mass; use epsilon smoothing)");
    }
    kl += ps[c] * std::log(ps[c] / qs[c]);
  }
  // Rounding can push a mathematically nonnegative sum a hair below zero.
  return kl < 0.0 && kl > -1e-15 ? 0.0 : kl;
}

int argmax_class(const ProbabilityVector& p, TieRule rule) {
  (void)rule;  // single rule today; parameter keeps reports explicit
  int best = 0;
  for (std::size_t c = 1; c < p.size(); ++c) {
    if (p[c] > p[best]) best = static_cast<int>(c);
  }
  return best;
}

std::vector<int> argsort_classes(const ProbabilityVector& p, TieRule rule) {
  (void)rule;
  std::vector<int> order(p.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return p[a] > p[b]; });
  return order;
}

ProbabilityVector softmax(const LogitVector& logits) {
  const auto& z = logits.values;
  double zmax = *std::max_element(z.begin(), z.end());
  std::vector<double> out(z.size());
  double sum = 0.0;
  for (std::size_t c = 0; c < z.size(); ++c) {
    out[c] = std::exp(z[c] - zmax);
    sum += out[c];
  }
  for (double& v : out) v /= sum;
  return ProbabilityVector::trusted(std::move(out));
}

}  // namespace calev
