#include <functional>
#include <string>
#include <vector>

#include <doctest.h>

#include "calev/dataset.hpp"
#include "calev/error.hpp"
#include "calev/probability.hpp"
#include "calev/rng.hpp"
#include "testutil.hpp"

using namespace calev;
using testutil::TempDir;

namespace {

ErrorKind kind_of(const std::function<void()>& body) {
  try {
    body();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::Usage;
}

std::string message_of(const std::function<void()>& body) {
  try {
    body();
  } catch (const Error& e) {
    return e.what();
  }
  FAIL("expected an Error");
  return {};
}

}  // namespace

TEST_SUITE("ingest") {

TEST_CASE("annotations parse the default schema") {
  TempDir tmp("ann");
  testutil::write_file(tmp.file("ann.jsonl"),
                       R"({"uid":"i1","label_counter":{"e":60,"n":30,"c":10},"premise":"p1"}
{"uid":"i2","label_counter":{"e":100}}
{"uid":"i3","label_counter":{"n":1,"c":1}}
)");
  AnnotationFormat format;
  format.metadata_keys = {"premise"};
  AnnotationData data = read_annotations(tmp.file("ann.jsonl"), format);

  CHECK(data.label_names == std::vector<std::string>{"e", "n", "c"});
  REQUIRE(data.instances.size() == 3);
  CHECK(data.instances[0].uid == "i1");
  CHECK(data.instances[0].votes.counts == std::vector<std::int64_t>{60, 30, 10});
  CHECK(data.instances[0].votes.total == 100);
  CHECK(data.instances[0].metadata.at("premise") == "p1");
  // Missing classes count as zero votes.
  CHECK(data.instances[1].votes.counts == std::vector<std::int64_t>{100, 0, 0});
  CHECK(data.instances[2].votes.counts == std::vector<std::int64_t>{0, 1, 1});
  CHECK(data.instances[2].metadata.empty());
}

TEST_CASE("annotations support custom key names") {
  TempDir tmp("ann_custom");
  testutil::write_file(tmp.file("ann.jsonl"), R"({"id":"x","votes":{"b":2}}
)");
  AnnotationFormat format;
  format.uid_key = "id";
  format.votes_key = "votes";
  format.class_names = {"a", "b"};
  AnnotationData data = read_annotations(tmp.file("ann.jsonl"), format);
  REQUIRE(data.instances.size() == 1);
  CHECK(data.instances[0].votes.counts == std::vector<std::int64_t>{0, 2});
}

TEST_CASE("annotation rejects carry the file location") {
  TempDir tmp("ann_bad");

  testutil::write_file(tmp.file("dup.jsonl"),
                       R"({"uid":"a","label_counter":{"e":1}}
{"uid":"b","label_counter":{"e":1}}
{"uid":"a","label_counter":{"e":1}}
)");
  std::string message = message_of([&] { read_annotations(tmp.file("dup.jsonl")); });
  CHECK(message.find(":3:") != std::string::npos);
  CHECK(message.find("\"a\"") != std::string::npos);

  testutil::write_file(tmp.file("unknown.jsonl"), R"({"uid":"a","label_counter":{"x":5}}
)");
  CHECK(message_of([&] { read_annotations(tmp.file("unknown.jsonl")); }).find("x") !=
        std::string::npos);

  testutil::write_file(tmp.file("neg.jsonl"), R"({"uid":"a","label_counter":{"e":-1}}
)");
  CHECK(kind_of([&] { read_annotations(tmp.file("neg.jsonl")); }) ==
        ErrorKind::Validation);

  testutil::write_file(tmp.file("zero.jsonl"), R"({"uid":"a","label_counter":{}}
)");
  CHECK(kind_of([&] { read_annotations(tmp.file("zero.jsonl")); }) ==
        ErrorKind::Validation);

  testutil::write_file(tmp.file("badjson.jsonl"), "{nope\n");
  CHECK(message_of([&] { read_annotations(tmp.file("badjson.jsonl")); }).find(":1:") !=
        std::string::npos);

  testutil::write_file(tmp.file("array.jsonl"), "[1,2]\n");
  CHECK(kind_of([&] { read_annotations(tmp.file("array.jsonl")); }) ==
        ErrorKind::Validation);

  testutil::write_file(tmp.file("nouid.jsonl"), R"({"label_counter":{"e":1}}
)");
  CHECK(kind_of([&] { read_annotations(tmp.file("nouid.jsonl")); }) ==
        ErrorKind::Validation);

  CHECK(kind_of([&] { read_annotations(tmp.file("missing.jsonl")); }) ==
        ErrorKind::Validation);

  AnnotationFormat dup_class;
  dup_class.class_names = {"e", "e", "c"};
  testutil::write_file(tmp.file("ok.jsonl"), R"({"uid":"a","label_counter":{"e":1}}
)");
  CHECK(kind_of([&] { read_annotations(tmp.file("ok.jsonl"), dup_class); }) ==
        ErrorKind::Usage);
}

TEST_CASE("empty annotation file parses to an empty list") {
  TempDir tmp("ann_empty");
  testutil::write_file(tmp.file("empty.jsonl"), "");
  AnnotationData data = read_annotations(tmp.file("empty.jsonl"));
  CHECK(data.instances.empty());
  CHECK(data.class_count() == 3);
}

TEST_CASE("predictions parse probs, logits, or both") {
  TempDir tmp("pred");

  testutil::write_file(tmp.file("probs.jsonl"), R"({"uid":"i1","probs":[0.6,0.3,0.1]}
)");
  std::vector<PredictionRecord> records = read_predictions(tmp.file("probs.jsonl"));
  REQUIRE(records.size() == 1);
  CHECK(records[0].uid == "i1");
  CHECK_FALSE(records[0].has_logits());
  CHECK(records[0].resolved_probs()[0] == 0.6);

  testutil::write_file(tmp.file("logits.jsonl"), R"({"uid":"i1","logits":[1.0,0.0,0.0]}
)");
  records = read_predictions(tmp.file("logits.jsonl"));
  REQUIRE(records.size() == 1);
  CHECK(records[0].has_logits());
  // Materialized probabilities are exactly the softmax of the logits.
  CHECK(records[0].resolved_probs() ==
        softmax(LogitVector::from({1.0, 0.0, 0.0})));

  testutil::write_file(
      tmp.file("both.jsonl"),
      R"({"uid":"i1","probs":[0.576116885,0.211941558,0.211941557],"logits":[1.0,0.0,0.0]}
)");
  records = read_predictions(tmp.file("both.jsonl"));
  REQUIRE(records.size() == 1);
  CHECK(records[0].has_logits());
}

TEST_CASE("prediction rejects name the offending record") {
  TempDir tmp("pred_bad");

  testutil::write_file(
      tmp.file("inconsistent.jsonl"),
      R"({"uid":"i1","probs":[0.7,0.2,0.1],"logits":[1.0,0.0,0.0]}
)");
  std::string message =
      message_of([&] { read_predictions(tmp.file("inconsistent.jsonl")); });
  CHECK(message.find("i1") != std::string::npos);

  testutil::write_file(tmp.file("badsum.jsonl"), R"({"uid":"i9","probs":[0.9,0.3]}
)");
  CHECK(message_of([&] { read_predictions(tmp.file("badsum.jsonl")); }).find("i9") !=
        std::string::npos);

  testutil::write_file(tmp.file("width.jsonl"), R"({"uid":"a","probs":[0.5,0.5]}
{"uid":"b","probs":[0.2,0.3,0.5]}
)");
  CHECK(message_of([&] { read_predictions(tmp.file("width.jsonl")); }).find(":2:") !=
        std::string::npos);
  CHECK(kind_of([&] { read_predictions(tmp.file("width.jsonl"), {}, 3); }) ==
        ErrorKind::Validation);

  testutil::write_file(tmp.file("neither.jsonl"), R"({"uid":"a"}
)");
  CHECK(kind_of([&] { read_predictions(tmp.file("neither.jsonl")); }) ==
        ErrorKind::Validation);

  testutil::write_file(tmp.file("dup.jsonl"), R"({"uid":"a","probs":[1.0,0.0]}
{"uid":"a","probs":[1.0,0.0]}
)");
  CHECK(kind_of([&] { read_predictions(tmp.file("dup.jsonl")); }) ==
        ErrorKind::Validation);

  testutil::write_file(tmp.file("nan.jsonl"), R"({"uid":"a","logits":[null,0.0]}
)");
  CHECK(kind_of([&] { read_predictions(tmp.file("nan.jsonl")); }) ==
        ErrorKind::Validation);

  testutil::write_file(tmp.file("empty.jsonl"), "");
  CHECK(read_predictions(tmp.file("empty.jsonl")).empty());
}

TEST_CASE("predictions support custom key names") {
  TempDir tmp("pred_custom");
  testutil::write_file(tmp.file("p.jsonl"), R"({"id":"x","p":[0.25,0.75]}
)");
  PredictionFormat format;
  format.uid_key = "id";
  format.probs_key = "p";
  std::vector<PredictionRecord> records = read_predictions(tmp.file("p.jsonl"), format);
  REQUIRE(records.size() == 1);
  CHECK(records[0].uid == "x");
}

TEST_CASE("alignment keeps annotation order and validates uid sets") {
  AnnotationData annotations;
  annotations.label_names = {"e", "n", "c"};
  for (const char* uid : {"b", "a", "c"}) {
    AnnotatedInstance inst;
    inst.uid = uid;
    inst.votes = VoteCounts::from({3, 2, 1});
    annotations.instances.push_back(std::move(inst));
  }
  std::vector<PredictionRecord> predictions;
  for (const char* uid : {"c", "b", "a"}) {
    PredictionRecord record;
    record.uid = uid;
    record.probs = ProbabilityVector::from({0.5, 0.3, 0.2});
    predictions.push_back(std::move(record));
  }

  AlignedDataset ds = align(annotations, predictions, AlignMode::Strict);
  REQUIRE(ds.size() == 3);
  CHECK(ds.instances[0].uid == "b");
  CHECK(ds.instances[1].uid == "a");
  CHECK(ds.instances[2].uid == "c");
  CHECK(ds.instances[0].human_dist == normalize_votes(ds.instances[0].votes));
  CHECK(ds.drops.annotations_dropped == 0);
  CHECK(ds.drops.predictions_dropped == 0);

  // Strict alignment refuses mismatched uid sets and lists offenders.
  std::vector<PredictionRecord> extra = predictions;
  extra.push_back(predictions[0]);
  extra.back().uid = "zzz";
  CHECK(kind_of([&] { align(annotations, extra, AlignMode::Strict); }) ==
        ErrorKind::Alignment);
  CHECK(message_of([&] { align(annotations, extra, AlignMode::Strict); }).find("zzz") !=
        std::string::npos);

  std::vector<PredictionRecord> missing(predictions.begin(), predictions.end() - 1);
  CHECK(kind_of([&] { align(annotations, missing, AlignMode::Strict); }) ==
        ErrorKind::Alignment);

  // Intersect keeps the common uids, still in annotation order.
  AlignedDataset partial = align(annotations, extra, AlignMode::Intersect);
  CHECK(partial.size() == 3);
  CHECK(partial.drops.predictions_dropped == 1);
  AlignedDataset narrowed = align(annotations, missing, AlignMode::Intersect);
  CHECK(narrowed.size() == 2);
  CHECK(narrowed.drops.annotations_dropped == 1);
  CHECK(narrowed.instances[0].uid == "b");
  CHECK(narrowed.instances[1].uid == "c");

  std::vector<PredictionRecord> disjoint = {predictions[0]};
  disjoint[0].uid = "nope";
  CHECK(kind_of([&] { align(annotations, disjoint, AlignMode::Intersect); }) ==
        ErrorKind::Alignment);

  AnnotationData no_annotations;
  no_annotations.label_names = {"e", "n", "c"};
  CHECK(kind_of([&] { align(no_annotations, predictions, AlignMode::Strict); }) ==
        ErrorKind::Validation);
  CHECK(kind_of([&] { align(annotations, {}, AlignMode::Strict); }) ==
        ErrorKind::Validation);

  // Width disagreement between a prediction and the class list.
  std::vector<PredictionRecord> narrow = predictions;
  narrow[1].probs = ProbabilityVector::from({0.5, 0.5});
  std::string width_message =
      message_of([&] { align(annotations, narrow, AlignMode::Strict); });
  CHECK(kind_of([&] { align(annotations, narrow, AlignMode::Strict); }) ==
        ErrorKind::Validation);
  CHECK(width_message.find("b") != std::string::npos);
}

TEST_CASE("strict alignment lists at most ten offenders per side") {
  AnnotationData annotations;
  annotations.label_names = {"e", "n"};
  for (int i = 0; i < 13; ++i) {
    AnnotatedInstance inst;
    inst.uid = "ann" + std::to_string(i);
    inst.votes = VoteCounts::from({1, 1});
    annotations.instances.push_back(std::move(inst));
  }
  std::vector<PredictionRecord> predictions;
  PredictionRecord record;
  record.uid = "pred0";
  record.probs = ProbabilityVector::from({0.5, 0.5});
  predictions.push_back(record);

  std::string message =
      message_of([&] { align(annotations, predictions, AlignMode::Strict); });
  CHECK(message.find("...") != std::string::npos);
  CHECK(message.find("ann0") != std::string::npos);
  CHECK(message.find("ann12") == std::string::npos);  // truncated at ten
}

TEST_CASE("native dataset export round-trips bit-identically") {
  RandomStream g(41);
  AlignedDataset ds = testutil::random_dataset(g, 20, 3);
  // Give half the instances logits as well.
  for (std::size_t i = 0; i < ds.instances.size(); i += 2) {
    std::vector<double> z = {g.normal(), g.normal(), g.normal()};
    ds.instances[i].prediction.logits = LogitVector::from(z);
    ds.instances[i].prediction.probs = softmax(*ds.instances[i].prediction.logits);
  }

  TempDir tmp("roundtrip");
  write_dataset(tmp.file("ds.jsonl"), ds);
  AlignedDataset loaded = read_dataset(tmp.file("ds.jsonl"));

  CHECK(loaded.class_count == ds.class_count);
  CHECK(loaded.label_names == ds.label_names);
  REQUIRE(loaded.size() == ds.size());
  for (std::int64_t i = 0; i < ds.size(); ++i) {
    const auto& a = ds.instances[i];
    const auto& b = loaded.instances[i];
    CHECK(a.uid == b.uid);
    CHECK(a.votes.counts == b.votes.counts);
    CHECK(a.human_dist == b.human_dist);
    CHECK(a.prediction.resolved_probs() == b.prediction.resolved_probs());
    CHECK(a.prediction.has_logits() == b.prediction.has_logits());
    if (a.prediction.has_logits()) {
      CHECK(a.prediction.logits->values == b.prediction.logits->values);
    }
  }

  write_dataset(tmp.file("ds2.jsonl"), loaded);
  CHECK(testutil::slurp(tmp.file("ds.jsonl")) == testutil::slurp(tmp.file("ds2.jsonl")));
}

TEST_CASE("prediction and annotation writers round-trip") {
  RandomStream g(42);
  AlignedDataset ds = testutil::random_dataset(g, 10, 3);
  TempDir tmp("writers");

  std::vector<PredictionRecord> predictions;
  for (const auto& inst : ds.instances) predictions.push_back(inst.prediction);
  write_predictions(tmp.file("preds.jsonl"), predictions);
  std::vector<PredictionRecord> loaded = read_predictions(tmp.file("preds.jsonl"));
  REQUIRE(loaded.size() == predictions.size());
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    CHECK(loaded[i].uid == predictions[i].uid);
    CHECK(loaded[i].resolved_probs() == predictions[i].resolved_probs());
  }

  AnnotationData annotations;
  annotations.label_names = {"e", "n", "c"};
  for (const auto& inst : ds.instances) {
    AnnotatedInstance a;
    a.uid = inst.uid;
    a.votes = inst.votes;
    a.metadata["source"] = "unit";
    annotations.instances.push_back(std::move(a));
  }
  AnnotationFormat format;
  format.metadata_keys = {"source"};
  write_annotations(tmp.file("ann.jsonl"), annotations, format);
  AnnotationData reread = read_annotations(tmp.file("ann.jsonl"), format);
  REQUIRE(reread.instances.size() == annotations.instances.size());
  for (std::size_t i = 0; i < reread.instances.size(); ++i) {
    CHECK(reread.instances[i].uid == annotations.instances[i].uid);
    CHECK(reread.instances[i].votes.counts == annotations.instances[i].votes.counts);
    CHECK(reread.instances[i].metadata.at("source") == "unit");
  }
}

}  // TEST_SUITE
