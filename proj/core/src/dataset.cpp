#include "calev/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "calev/error.hpp"
#include "calev/report_io.hpp"

namespace calev {

using nlohmann::json;

namespace {

std::string location(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line);
}

json parse_line(const std::filesystem::path& path, std::size_t line_no,
                const std::string& line) {
  json record = json::parse(line, nullptr, false);
  if (record.is_discarded() || !record.is_object()) {
    throw Error(ErrorKind::Validation,
                location(path, line_no) + ": not a JSON object");
  }
  return record;
}

std::string required_string(const json& record, const std::string& key,
                            const std::filesystem::path& path, std::size_t line_no) {
  auto it = record.find(key);
  if (it == record.end() || !it->is_string()) {
    throw Error(ErrorKind::Validation,
                location(path, line_no) + ": missing string field \"" + key + "\"");
  }
  return it->get<std::string>();
}

std::vector<double> number_array(const json& value, const std::string& key,
                                 const std::filesystem::path& path,
                                 std::size_t line_no) {
  if (!value.is_array()) {
    throw Error(ErrorKind::Validation,
                location(path, line_no) + ": field \"" + key + "\" must be an array");
  }
  std::vector<double> out;
  out.reserve(value.size());
  for (const auto& v : value) {
    if (!v.is_number()) {
      throw Error(ErrorKind::Validation,
                  location(path, line_no) + ": field \"" + key +
                      "\" must contain only numbers");
    }
    out.push_back(v.get<double>());
  }
  return out;
}

// Iterates non-blank lines of a JSONL file. Missing files are errors;
// empty files yield nothing.
template <typename Fn>
void for_each_line(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::Validation, "cannot open file: " + path.string());
  }
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    fn(line_no, line);
  }
}

}  // namespace

const ProbabilityVector& PredictionRecord::resolved_probs() const {
  if (!probs.has_value()) {
    throw Error(ErrorKind::Computation,
                "prediction for uid " + uid + " has no materialized probabilities");
  }
  return *probs;
}

AnnotationData read_annotations(const std::filesystem::path& path,
                                const AnnotationFormat& format) {
  if (format.class_names.empty()) {
    throw Error(ErrorKind::Usage, "annotation format: class name list is empty");
  }
  std::unordered_map<std::string, std::size_t> class_index;
  for (std::size_t c = 0; c < format.class_names.size(); ++c) {
    if (!class_index.emplace(format.class_names[c], c).second) {
      throw Error(ErrorKind::Usage,
                  "annotation format: duplicate class name \"" +
                      format.class_names[c] + "\"");
    }
  }

  AnnotationData data;
  data.label_names = format.class_names;
  std::unordered_set<std::string> seen;

  for_each_line(path, [&](std::size_t line_no, const std::string& line) {
    json record = parse_line(path, line_no, line);
    AnnotatedInstance instance;
    instance.uid = required_string(record, format.uid_key, path, line_no);
    if (!seen.insert(instance.uid).second) {
      throw Error(ErrorKind::Validation,
                  location(path, line_no) + ": duplicate uid \"" + instance.uid + "\"");
    }

    auto votes_it = record.find(format.votes_key);
    if (votes_it == record.end() || !votes_it->is_object()) {
      throw Error(ErrorKind::Validation,
                  location(path, line_no) + ": missing vote-count object \"" +
                      format.votes_key + "\"");
    }
    std::vector<std::int64_t> counts(format.class_names.size(), 0);
    for (const auto& [key, value] : votes_it->items()) {
      auto idx = class_index.find(key);
      if (idx == class_index.end()) {
        throw Error(ErrorKind::Validation,
                    location(path, line_no) + ": unknown class name \"" + key +
                        "\" in vote counts");
      }
      if (!value.is_number_integer() || value.get<std::int64_t>() < 0) {
        throw Error(ErrorKind::Validation,
                    location(path, line_no) + ": vote count for class \"" + key +
                        "\" must be a nonnegative integer");
      }
      counts[idx->second] = value.get<std::int64_t>();
    }
    try {
      instance.votes = VoteCounts::from(std::move(counts));
    } catch (const Error& e) {
      throw Error(e.kind(), location(path, line_no) + ": uid \"" + instance.uid +
                                "\": " + e.what());
    }

    for (const auto& key : format.metadata_keys) {
      auto it = record.find(key);
      if (it != record.end() && it->is_string()) {
        instance.metadata[key] = it->get<std::string>();
      }
    }
    data.instances.push_back(std::move(instance));
  });

  return data;
}

std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path,
                                               const PredictionFormat& format,
                                               int expected_class_count) {
  std::vector<PredictionRecord> records;
  std::unordered_set<std::string> seen;
  int class_count = expected_class_count;

  for_each_line(path, [&](std::size_t line_no, const std::string& line) {
    json record = parse_line(path, line_no, line);
    PredictionRecord prediction;
    prediction.uid = required_string(record, format.uid_key, path, line_no);
    if (!seen.insert(prediction.uid).second) {
      throw Error(ErrorKind::Validation,
                  location(path, line_no) + ": duplicate uid \"" + prediction.uid + "\"");
    }

    auto check_width = [&](std::size_t width, const std::string& key) {
      if (class_count == 0) {
        class_count = static_cast<int>(width);
      } else if (width != static_cast<std::size_t>(class_count)) {
        throw Error(ErrorKind::Validation,
                    location(path, line_no) + ": uid \"" + prediction.uid +
                        "\": field \"" + key + "\" has " + std::to_string(width) +
                        " classes, expected " + std::to_string(class_count));
      }
    };

    auto probs_it = record.find(format.probs_key);
    if (probs_it != record.end() && !probs_it->is_null()) {
      auto values = number_array(*probs_it, format.probs_key, path, line_no);
      check_width(values.size(), format.probs_key);
      try {
        prediction.probs = ProbabilityVector::from(std::move(values));
      } catch (const Error& e) {
        throw Error(e.kind(), location(path, line_no) + ": uid \"" + prediction.uid +
                                  "\": " + e.what());
      }
    }
    auto logits_it = record.find(format.logits_key);
    if (logits_it != record.end() && !logits_it->is_null()) {
      auto values = number_array(*logits_it, format.logits_key, path, line_no);
      check_width(values.size(), format.logits_key);
      try {
        prediction.logits = LogitVector::from(std::move(values));
      } catch (const Error& e) {
        throw Error(e.kind(), location(path, line_no) + ": uid \"" + prediction.uid +
                                  "\": " + e.what());
      }
    }

    if (!prediction.probs && !prediction.logits) {
      throw Error(ErrorKind::Validation,
                  location(path, line_no) + ": uid \"" + prediction.uid +
                      "\": needs \"" + format.probs_key + "\" or \"" +
                      format.logits_key + "\"");
    }
    if (prediction.probs && prediction.logits) {
      ProbabilityVector derived = softmax(*prediction.logits);
      for (std::size_t c = 0; c < derived.size(); ++c) {
        if (std::abs(derived[c] - (*prediction.probs)[c]) > kLogitProbTolerance) {
          throw Error(ErrorKind::Validation,
                      location(path, line_no) + ": uid \"" + prediction.uid +
                          "\": probabilities disagree with softmax(logits) at class " +
                          std::to_string(c));
        }
      }
    }
    if (!prediction.probs) {
      prediction.probs = softmax(*prediction.logits);
    }
    records.push_back(std::move(prediction));
  });

  return records;
}

AlignedDataset align(const AnnotationData& annotations,
                     const std::vector<PredictionRecord>& predictions,
                     AlignMode mode) {
  if (annotations.instances.empty()) {
    throw Error(ErrorKind::Validation, "align: annotation set is empty");
  }
  if (predictions.empty()) {
    throw Error(ErrorKind::Validation, "align: prediction set is empty");
  }

  std::unordered_map<std::string, const PredictionRecord*> by_uid;
  by_uid.reserve(predictions.size());
  for (const auto& p : predictions) {
    by_uid.emplace(p.uid, &p);
  }

  if (mode == AlignMode::Strict) {
    std::vector<std::string> missing;
    for (const auto& a : annotations.instances) {
      if (!by_uid.count(a.uid)) missing.push_back(a.uid);
    }
    std::vector<std::string> extra;
    if (annotations.instances.size() != predictions.size() || !missing.empty()) {
      std::unordered_set<std::string> annotated;
      annotated.reserve(annotations.instances.size());
      for (const auto& a : annotations.instances) annotated.insert(a.uid);
      for (const auto& p : predictions) {
        if (!annotated.count(p.uid)) extra.push_back(p.uid);
      }
    }
    if (!missing.empty() || !extra.empty()) {
      auto preview = [](const std::vector<std::string>& uids) {
        std::string out;
        std::size_t shown = std::min<std::size_t>(uids.size(), 10);
        for (std::size_t i = 0; i < shown; ++i) {
          out += (i ? ", " : "") + uids[i];
        }
        if (uids.size() > shown) out += ", ...";
        return out;
      };
      std::string message = "align: uid sets differ under strict alignment";
      if (!missing.empty()) {
        message += "; " + std::to_string(missing.size()) +
                   " annotated uid(s) lack predictions: " + preview(missing);
      }
      if (!extra.empty()) {
        message += "; " + std::to_string(extra.size()) +
                   " predicted uid(s) lack annotations: " + preview(extra);
      }
      throw Error(ErrorKind::Alignment, message);
    }
  }

  AlignedDataset dataset;
  dataset.class_count = annotations.class_count();
  dataset.label_names = annotations.label_names;

  for (const auto& a : annotations.instances) {
    auto it = by_uid.find(a.uid);
    if (it == by_uid.end()) {
      ++dataset.drops.annotations_dropped;
      continue;
    }
    const PredictionRecord& p = *it->second;
    if (p.resolved_probs().size() != static_cast<std::size_t>(dataset.class_count)) {
      throw Error(ErrorKind::Validation,
                  "align: uid \"" + a.uid + "\": prediction has " +
                      std::to_string(p.resolved_probs().size()) +
                      " classes, annotations have " +
                      std::to_string(dataset.class_count));
    }
    AlignedInstance instance;
    instance.uid = a.uid;
    instance.votes = a.votes;
    instance.human_dist = normalize_votes(a.votes);
    instance.prediction = p;
    dataset.instances.push_back(std::move(instance));
  }
  dataset.drops.predictions_dropped =
      static_cast<std::int64_t>(predictions.size()) - dataset.size();

  if (dataset.instances.empty()) {
    throw Error(ErrorKind::Alignment,
                "align: no uid appears in both annotations and predictions");
  }
  return dataset;
}

namespace {

json prediction_to_json(const PredictionRecord& p) {
  json record;
  record["uid"] = p.uid;
  record["probs"] = p.resolved_probs().values();
  if (p.logits) {
    record["logits"] = p.logits->values;
  }
  return record;
}

}  // namespace

void write_dataset(const std::filesystem::path& path, const AlignedDataset& dataset) {
  std::string out;
  json header;
  header["type"] = "calev.dataset";
  header["class_count"] = dataset.class_count;
  header["label_names"] = dataset.label_names;
  out += header.dump();
  out += '\n';
  for (const auto& instance : dataset.instances) {
    json record = prediction_to_json(instance.prediction);
    record["votes"] = instance.votes.counts;
    out += record.dump();
    out += '\n';
  }
  write_text_file(path, out);
}

AlignedDataset read_dataset(const std::filesystem::path& path) {
  AlignedDataset dataset;
  bool have_header = false;

  for_each_line(path, [&](std::size_t line_no, const std::string& line) {
    json record = parse_line(path, line_no, line);
    if (!have_header) {
      if (record.value("type", "") != "calev.dataset" ||
          !record.contains("class_count") || !record.contains("label_names")) {
        throw Error(ErrorKind::Validation,
                    location(path, line_no) + ": expected calev.dataset header record");
      }
      dataset.class_count = record["class_count"].get<int>();
      dataset.label_names = record["label_names"].get<std::vector<std::string>>();
      if (dataset.class_count < 1 ||
          dataset.label_names.size() != static_cast<std::size_t>(dataset.class_count)) {
        throw Error(ErrorKind::Validation,
                    location(path, line_no) + ": header class_count does not match label_names");
      }
      have_header = true;
      return;
    }

    AlignedInstance instance;
    instance.uid = required_string(record, "uid", path, line_no);
    if (!record.contains("votes")) {
      throw Error(ErrorKind::Validation,
                  location(path, line_no) + ": missing \"votes\" array");
    }
    std::vector<std::int64_t> counts;
    for (const auto& v : record["votes"]) {
      if (!v.is_number_integer()) {
        throw Error(ErrorKind::Validation,
                    location(path, line_no) + ": votes must be integers");
      }
      counts.push_back(v.get<std::int64_t>());
    }
    if (counts.size() != static_cast<std::size_t>(dataset.class_count)) {
      throw Error(ErrorKind::Validation,
                  location(path, line_no) + ": votes width does not match header");
    }
    try {
      instance.votes = VoteCounts::from(std::move(counts));
    } catch (const Error& e) {
      throw Error(e.kind(), location(path, line_no) + ": " + e.what());
    }
    instance.human_dist = normalize_votes(instance.votes);

    instance.prediction.uid = instance.uid;
    if (!record.contains("probs")) {
      throw Error(ErrorKind::Validation,
                  location(path, line_no) + ": missing \"probs\" array");
    }
    auto probs = number_array(record["probs"], "probs", path, line_no);
    if (probs.size() != static_cast<std::size_t>(dataset.class_count)) {
      throw Error(ErrorKind::Validation,
                  location(path, line_no) + ": probs width does not match header");
    }
    double sum = 0.0;
    for (double v : probs) {
      if (!std::isfinite(v) || v < 0.0) {
        throw Error(ErrorKind::Validation,
                    location(path, line_no) + ": probs must be finite and nonnegative");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > kProbabilitySumTolerance) {
      throw Error(ErrorKind::Validation,
                  location(path, line_no) + ": probs do not sum to 1");
    }
    // No renormalization: the export wrote exact shortest-round-trip values,
    // so reading them back bit-identically is part of the format contract.
    instance.prediction.probs = ProbabilityVector::trusted(std::move(probs));
    if (record.contains("logits")) {
      auto logits = number_array(record["logits"], "logits", path, line_no);
      if (logits.size() != static_cast<std::size_t>(dataset.class_count)) {
        throw Error(ErrorKind::Validation,
                    location(path, line_no) + ": logits width does not match header");
      }
      try {
        instance.prediction.logits = LogitVector::from(std::move(logits));
      } catch (const Error& e) {
        throw Error(e.kind(), location(path, line_no) + ": " + e.what());
      }
    }
    dataset.instances.push_back(std::move(instance));
  });

  if (!have_header) {
    throw Error(ErrorKind::Validation,
                path.string() + ": missing calev.dataset header record");
  }
  if (dataset.instances.empty()) {
    throw Error(ErrorKind::Validation, path.string() + ": dataset has no instances");
  }
  return dataset;
}

void write_predictions(const std::filesystem::path& path,
                       std::span<const PredictionRecord> predictions) {
  std::string out;
  for (const auto& p : predictions) {
    out += prediction_to_json(p).dump();
    out += '\n';
  }
  write_text_file(path, out);
}

void write_annotations(const std::filesystem::path& path, const AnnotationData& data,
                       const AnnotationFormat& format) {
  if (format.class_names.size() != data.label_names.size()) {
    throw Error(ErrorKind::Usage,
                "write_annotations: format class count does not match data");
  }
  std::string out;
  for (const auto& instance : data.instances) {
    json votes;
    for (std::size_t c = 0; c < format.class_names.size(); ++c) {
      votes[format.class_names[c]] = instance.votes.counts[c];
    }
    json record;
    record[format.uid_key] = instance.uid;
    record[format.votes_key] = votes;
    for (const auto& [key, value] : instance.metadata) {
      record[key] = value;
    }
    out += record.dump();
    out += '\n';
  }
  write_text_file(path, out);
}

}  // namespace calev
