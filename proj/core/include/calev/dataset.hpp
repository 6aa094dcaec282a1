#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "calev/probability.hpp"

namespace calev {

// Key names for annotation JSONL files. Defaults match the published
// ChaosNLI schema; every field is overridable for other corpora.
struct AnnotationFormat {
  std::string uid_key = "uid";
  std::string votes_key = "label_counter";
  std::vector<std::string> class_names = {"e", "n", "c"};
  // Extra top-level string fields to carry into metadata, if present.
  std::vector<std::string> metadata_keys;
};

// Key names for prediction JSONL files.
struct PredictionFormat {
  std::string uid_key = "uid";
  std::string probs_key = "probs";
  std::string logits_key = "logits";
};

struct AnnotatedInstance {
  std::string uid;
  VoteCounts votes;
  std::map<std::string, std::string> metadata;
};

// One annotation file: the class-name order plus instances in file order.
// Every votes vector has exactly label_names.size() entries.
struct AnnotationData {
  std::vector<std::string> label_names;
  std::vector<AnnotatedInstance> instances;

  int class_count() const { return static_cast<int>(label_names.size()); }
};

// One classifier output row. At least one of probs/logits is present; when
// both are, softmax(logits) must match probs within kLogitProbTolerance.
struct PredictionRecord {
  std::string uid;
  std::optional<ProbabilityVector> probs;
  std::optional<LogitVector> logits;

  const ProbabilityVector& resolved_probs() const;
  bool has_logits() const { return logits.has_value(); }
};

inline constexpr double kLogitProbTolerance = 1e-6;

struct AlignedInstance {
  std::string uid;
  VoteCounts votes;
  ProbabilityVector human_dist;  // normalize_votes(votes), cached
  PredictionRecord prediction;
};

enum class AlignMode { Strict, Intersect };

struct DropReport {
  std::int64_t annotations_dropped = 0;
  std::int64_t predictions_dropped = 0;
};

// Annotations joined with predictions by uid, in annotation file order.
struct AlignedDataset {
  int class_count = 0;
  std::vector<std::string> label_names;
  std::vector<AlignedInstance> instances;
  DropReport drops;

  std::int64_t size() const { return static_cast<std::int64_t>(instances.size()); }
};

// Parses a JSONL annotation file. Errors carry "<path>:<line>:" prefixes;
// duplicate uids, negative counts, unknown vote keys and empty vote tallies
// are rejected. An empty file yields an empty instance list.
AnnotationData read_annotations(const std::filesystem::path& path,
                                const AnnotationFormat& format = {});

// Parses a JSONL prediction file. expected_class_count = 0 infers the width
// from the first record; every later record must agree.
std::vector<PredictionRecord> read_predictions(
    const std::filesystem::path& path, const PredictionFormat& format = {},
    int expected_class_count = 0);

// Joins annotations and predictions by uid. Strict mode requires identical
// uid sets and raises an Alignment error naming up to 10 offenders per side;
// Intersect keeps the common uids and records the drop counts. Empty inputs
// or an empty intersection are errors.
AlignedDataset align(const AnnotationData& annotations,
                     const std::vector<PredictionRecord>& predictions,
                     AlignMode mode = AlignMode::Strict);

// Native JSONL export: one header record (class names) followed by one
// record per instance. read_dataset(write_dataset(d)) is bit-identical.
void write_dataset(const std::filesystem::path& path, const AlignedDataset& dataset);
AlignedDataset read_dataset(const std::filesystem::path& path);

// Writes prediction records in the standard {"uid", "probs"[, "logits"]}
// JSONL shape readable by read_predictions.
void write_predictions(const std::filesystem::path& path,
                       std::span<const PredictionRecord> predictions);

// Writes annotation records in the configured annotation schema.
void write_annotations(const std::filesystem::path& path,
                       const AnnotationData& data,
                       const AnnotationFormat& format = {});

}  // namespace calev
