#include "calev/reference.hpp"

#include <string>

#include "calev/error.hpp"
#include "calev/rng.hpp"

namespace calev {

const char* reference_kind_name(ReferenceKind kind) {
  switch (kind) {
    case ReferenceKind::Oracle: return "oracle";
    case ReferenceKind::SubsampledHuman: return "subsampled";
    case ReferenceKind::Uniform: return "uniform";
  }
  return "unknown";
}

const char* sampling_mode_name(SamplingMode mode) {
  switch (mode) {
    case SamplingMode::WithoutReplacement: return "without-replacement";
    case SamplingMode::WithReplacement: return "with-replacement";
  }
  return "unknown";
}

namespace {

void require_instances(const AnnotationData& annotations) {
  if (annotations.instances.empty()) {
    throw Error(ErrorKind::Computation, "reference classifier: annotation set is empty");
  }
}

}  // namespace

std::vector<PredictionRecord> oracle_classifier(const AnnotationData& annotations) {
  require_instances(annotations);
  std::vector<PredictionRecord> predictions;
  predictions.reserve(annotations.instances.size());
  for (const auto& instance : annotations.instances) {
    PredictionRecord p;
    p.uid = instance.uid;
    // Same counts/total doubles the evaluation computes for the human side,
    // so instance-level errors against these annotations are exactly zero.
    p.probs = normalize_votes(instance.votes);
    predictions.push_back(std::move(p));
  }
  return predictions;
}

std::vector<PredictionRecord> subsampled_human_classifier(
    const AnnotationData& annotations, std::int64_t k, std::uint64_t seed,
    SamplingMode mode) {
  require_instances(annotations);
  if (k < 1) {
    throw Error(ErrorKind::Usage, "subsampled human classifier: k must be >= 1");
  }
  std::vector<PredictionRecord> predictions;
  predictions.reserve(annotations.instances.size());
  for (const auto& instance : annotations.instances) {
    // Substream keyed by uid: the draw for an instance does not depend on
    // how many instances precede it or on dataset order.
    RandomStream stream(seed, {fnv1a64(instance.uid)});
    std::vector<std::int64_t> drawn;
    if (mode == SamplingMode::WithoutReplacement) {
      if (k > instance.votes.total) {
        throw Error(ErrorKind::Validation,
                    "subsampled human classifier: uid \"" + instance.uid + "\" has " +
                        std::to_string(instance.votes.total) +
                        " annotations, cannot draw " + std::to_string(k) +
                        " without replacement");
      }
      drawn = stream.sample_without_replacement(instance.votes.counts, k);
    } else {
      drawn = stream.multinomial(normalize_votes(instance.votes).values(), k);
    }
    PredictionRecord p;
    p.uid = instance.uid;
    p.probs = normalize_votes(VoteCounts::from(std::move(drawn)));
    predictions.push_back(std::move(p));
  }
  return predictions;
}

std::vector<PredictionRecord> uniform_classifier(const AnnotationData& annotations) {
  require_instances(annotations);
  ProbabilityVector uniform = ProbabilityVector::uniform(annotations.class_count());
  std::vector<PredictionRecord> predictions;
  predictions.reserve(annotations.instances.size());
  for (const auto& instance : annotations.instances) {
    PredictionRecord p;
    p.uid = instance.uid;
    p.probs = uniform;
    predictions.push_back(std::move(p));
  }
  return predictions;
}

std::vector<PredictionRecord> make_reference(const AnnotationData& annotations,
                                             const ReferenceSpec& spec) {
  switch (spec.kind) {
    case ReferenceKind::Oracle:
      return oracle_classifier(annotations);
    case ReferenceKind::SubsampledHuman:
      if (!spec.seed.has_value()) {
        throw Error(ErrorKind::Usage,
                    "subsampled human classifier: a seed is required");
      }
      return subsampled_human_classifier(annotations, spec.subsample_size,
                                         *spec.seed, spec.sampling);
    case ReferenceKind::Uniform:
      return uniform_classifier(annotations);
  }
  throw Error(ErrorKind::Usage, "reference classifier: unknown kind");
}

}  // namespace calev
