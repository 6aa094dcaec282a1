#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "calev/dataset.hpp"

namespace calev {

enum class ReferenceKind { Oracle, SubsampledHuman, Uniform };
enum class SamplingMode { WithoutReplacement, WithReplacement };

const char* reference_kind_name(ReferenceKind kind);
const char* sampling_mode_name(SamplingMode mode);

struct ReferenceSpec {
  ReferenceKind kind = ReferenceKind::Oracle;
  std::int64_t subsample_size = 0;          // k; required for SubsampledHuman
  std::optional<std::uint64_t> seed;        // required for SubsampledHuman
  SamplingMode sampling = SamplingMode::WithoutReplacement;
};

// Predicts the full human vote distribution. Probabilities are the same
// counts/total doubles as the evaluation's human side, so instance-level
// errors are exactly zero against the same annotations.
std::vector<PredictionRecord> oracle_classifier(const AnnotationData& annotations);

// Predicts the normalized tally of k annotator votes resampled from each
// instance's pool. Without replacement draws a sub-multiset of the actual
// votes (k <= total required, error names the uid); with replacement
// resamples from the vote distribution. Draws use a (seed, fnv1a(uid))
// substream, so results are independent of instance order.
std::vector<PredictionRecord> subsampled_human_classifier(
    const AnnotationData& annotations, std::int64_t k, std::uint64_t seed,
    SamplingMode mode = SamplingMode::WithoutReplacement);

// Predicts the uniform distribution everywhere.
std::vector<PredictionRecord> uniform_classifier(const AnnotationData& annotations);

// Dispatch on spec.kind with parameter validation.
std::vector<PredictionRecord> make_reference(const AnnotationData& annotations,
                                             const ReferenceSpec& spec);

}  // namespace calev
