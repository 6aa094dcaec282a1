#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace calev {

// Tolerance for accepting an externally supplied probability vector before
// renormalization. Internal constructions (vote ratios, softmax) are exact
// and skip the check.
inline constexpr double kProbabilitySumTolerance = 1e-9;

// Drift at or below this is serialization noise: the values are kept
// bit-for-bit instead of renormalized, which makes ingestion idempotent
// (reading a file we wrote reproduces the exact same doubles). Larger
// drift, up to the acceptance tolerance above, is corrected by dividing.
inline constexpr double kRenormalizationThreshold = 1e-12;

// Deterministic tie handling shared by argmax and argsort. The rule is part
// of every report so results stay comparable across runs.
enum class TieRule { LowestIndex };

enum class EntropyBase { Nats, Bits };

const char* tie_rule_name(TieRule rule);
const char* entropy_base_name(EntropyBase base);

// Per-class annotation tallies for one instance. total is the annotator
// count; it is always the sum of counts and always positive.
struct VoteCounts {
  std::vector<std::int64_t> counts;
  std::int64_t total = 0;

  // Rejects negative entries and an all-zero tally.
  static VoteCounts from(std::vector<std::int64_t> counts);
};

// A categorical distribution: nonnegative coordinates summing to one.
// Construction either validates and renormalizes external values (from) or
// trusts values produced by internal exact operations (trusted).
class ProbabilityVector {
 public:
  ProbabilityVector() = default;

  static ProbabilityVector from(std::vector<double> values);
  static ProbabilityVector trusted(std::vector<double> values);
  static ProbabilityVector uniform(int class_count);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t c) const { return values_[c]; }
  const std::vector<double>& values() const { return values_; }
  bool empty() const { return values_.empty(); }

  friend bool operator==(const ProbabilityVector&, const ProbabilityVector&) = default;

 private:
  explicit ProbabilityVector(std::vector<double> values) : values_(std::move(values)) {}
  std::vector<double> values_;
};

// Raw classifier scores; finite but otherwise unconstrained.
struct LogitVector {
  std::vector<double> values;

  static LogitVector from(std::vector<double> values);
};

// Exact per-class ratio counts[c] / total. No renormalization pass, so the
// coordinates are bit-reproducible from the tallies alone.
ProbabilityVector normalize_votes(const VoteCounts& votes);

// Shannon entropy; zero coordinates contribute zero.
double entropy(const ProbabilityVector& p, EntropyBase base = EntropyBase::Nats);

// Total variation distance, computed as half the L1 distance.
double tvd(const ProbabilityVector& p, const ProbabilityVector& q);

// KL(p || q) with additive-epsilon smoothing applied to both arguments and
// renormalized. epsilon = 0 is exact and raises a Computation error when a
// zero q-coordinate carries p-mass ("undefined divergence").
double kl_divergence(const ProbabilityVector& p, const ProbabilityVector& q,
                     double epsilon = 0.0);

// Index of the most probable class; ties resolve to the lowest index.
int argmax_class(const ProbabilityVector& p, TieRule rule = TieRule::LowestIndex);

// Permutation of class indices by descending probability; ties keep
// ascending index order.
std::vector<int> argsort_classes(const ProbabilityVector& p,
                                 TieRule rule = TieRule::LowestIndex);

// Numerically stable softmax (max subtraction).
ProbabilityVector softmax(const LogitVector& logits);

}  // namespace calev
