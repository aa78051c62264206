#include <doctest.h>

#include <cmath>
#include <map>

#include "issuetag/evaluation.hpp"
#include "issuetag/rng.hpp"
#include "synthetic.hpp"

using namespace issuetag;

namespace {

TrainConfig quick_config() {
  TrainConfig config;
  config.dim = 16;
  config.epochs = 5;
  config.min_count = 1;
  config.seed = 7;
  return config;
}

ConfusionMatrix confusion_from_pairs(const std::vector<std::string>& labels,
                                     const std::vector<std::pair<size_t, size_t>>& pairs) {
  ConfusionMatrix cm(labels);
  for (auto [gold, predicted] : pairs) ++cm.at(gold, predicted);
  return cm;
}

}  // namespace

TEST_CASE("metrics of a diagonal confusion matrix are all one") {
  ConfusionMatrix cm({"bug", "enhancement", "question"});
  cm.at(0, 0) = 5;
  cm.at(1, 1) = 9;
  cm.at(2, 2) = 2;
  auto metrics = metrics_from_confusion(cm);
  for (const auto& m : metrics) {
    CHECK(m.precision == 1.0);
    CHECK(m.recall == 1.0);
    CHECK(m.f_measure == 1.0);
  }
}

TEST_CASE("metrics match the direct formula") {
  // bug: TP=8, FP=2, FN=2
  ConfusionMatrix cm({"bug", "other"});
  cm.at(0, 0) = 8;
  cm.at(0, 1) = 2;
  cm.at(1, 0) = 2;
  cm.at(1, 1) = 3;
  auto metrics = metrics_from_confusion(cm);
  CHECK(*metrics[0].precision == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(*metrics[0].recall == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(*metrics[0].f_measure == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("never-predicted never-gold class keeps the undefined marker") {
  ConfusionMatrix cm({"bug", "enhancement", "question"});
  cm.at(0, 0) = 4;
  cm.at(1, 1) = 4;
  auto metrics = metrics_from_confusion(cm);
  CHECK(!metrics[2].precision.has_value());
  CHECK(!metrics[2].recall.has_value());
  CHECK(!metrics[2].f_measure.has_value());
  // macro F skips undefined classes
  CHECK(*macro_f_of(metrics) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("metrics agree with a brute-force recount on random instances") {
  Rng rng(123);
  for (int trial = 0; trial < 100; ++trial) {
    size_t num_labels = 2 + rng.below(4);
    std::vector<std::string> labels;
    for (size_t i = 0; i < num_labels; ++i) labels.push_back("L" + std::to_string(i));
    size_t pairs_count = rng.below(60);
    std::vector<std::pair<size_t, size_t>> pairs;
    for (size_t i = 0; i < pairs_count; ++i) {
      pairs.emplace_back(rng.below(num_labels), rng.below(num_labels));
    }
    auto metrics = metrics_from_confusion(confusion_from_pairs(labels, pairs));

    for (size_t c = 0; c < num_labels; ++c) {
      uint64_t tp = 0, fp = 0, fn = 0;
      for (auto [gold, predicted] : pairs) {
        if (gold == c && predicted == c) ++tp;
        if (gold != c && predicted == c) ++fp;
        if (gold == c && predicted != c) ++fn;
      }
      if (tp + fp == 0) {
        CHECK(!metrics[c].precision.has_value());
      } else {
        CHECK(*metrics[c].precision == static_cast<double>(tp) / (tp + fp));  // exact
      }
      if (tp + fn == 0) {
        CHECK(!metrics[c].recall.has_value());
      } else {
        CHECK(*metrics[c].recall == static_cast<double>(tp) / (tp + fn));
      }
    }
  }
}

TEST_CASE("per-class F satisfies the harmonic mean identity") {
  Rng rng(321);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::string> labels{"a", "b", "c"};
    std::vector<std::pair<size_t, size_t>> pairs;
    size_t n = 1 + rng.below(80);
    for (size_t i = 0; i < n; ++i) pairs.emplace_back(rng.below(3), rng.below(3));
    auto metrics = metrics_from_confusion(confusion_from_pairs(labels, pairs));
    for (const auto& m : metrics) {
      if (m.precision && m.recall && *m.precision + *m.recall > 0) {
        REQUIRE(m.f_measure.has_value());
        double expected = 2 * *m.precision * *m.recall / (*m.precision + *m.recall);
        CHECK(*m.f_measure == doctest::Approx(expected).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("cross-validation on the separable corpus is near perfect") {
  Dataset dataset = testsupport::separable_dataset(30, 5);
  EvaluationReport report = cross_validate(dataset, 5, quick_config(), 11);
  REQUIRE(report.macro_f.has_value());
  CHECK(*report.macro_f >= 0.98);
  CHECK(report.labels == std::vector<std::string>{"bug", "enhancement", "question"});
  // out-of-fold predictions cover each issue exactly once
  CHECK(report.confusion.total() == dataset.size());
}

TEST_CASE("cross-validation is deterministic end to end") {
  Dataset dataset = testsupport::separable_dataset(20, 6);
  EvaluationReport first = cross_validate(dataset, 4, quick_config(), 3);
  EvaluationReport second = cross_validate(dataset, 4, quick_config(), 3);
  CHECK(first.to_json() == second.to_json());
}

TEST_CASE("parallel folds produce the same report as sequential") {
  Dataset dataset = testsupport::separable_dataset(20, 61);
  EvaluateOptions sequential;
  EvaluateOptions parallel;
  parallel.jobs = 4;
  EvaluationReport a = cross_validate(dataset, 4, quick_config(), 3, sequential);
  EvaluationReport b = cross_validate(dataset, 4, quick_config(), 3, parallel);
  CHECK(a.to_json() == b.to_json());
}

TEST_CASE("per-fold aggregation is exposed and deterministic") {
  Dataset dataset = testsupport::separable_dataset(20, 62);
  EvaluateOptions options;
  options.aggregation = FoldAggregation::PerFoldMean;
  EvaluationReport report = cross_validate(dataset, 4, quick_config(), 3, options);
  REQUIRE(report.macro_f.has_value());
  CHECK(*report.macro_f >= 0.9);
  CHECK(report.to_json().find("per_fold_mean") != std::string::npos);
}

TEST_CASE("holdout resubstitution on separable data is near perfect") {
  Dataset dataset = testsupport::separable_dataset(30, 8);
  EvaluationReport report = evaluate_holdout(dataset, dataset, quick_config());
  for (const auto& metrics : report.per_class) {
    REQUIRE(metrics.f_measure.has_value());
    CHECK(*metrics.f_measure >= 0.99);
  }
}

TEST_CASE("holdout records test class proportions") {
  Dataset train = testsupport::separable_dataset(10, 9);
  Dataset test;
  size_t counts[3] = {48, 42, 10};  // 48% / 42% / 10%
  for (size_t cls = 0; cls < 3; ++cls) {
    for (size_t i = 0; i < counts[cls]; ++i) {
      LabeledIssue issue;
      issue.id = "t" + std::to_string(cls) + "-" + std::to_string(i);
      issue.label = canonical_labels()[cls];
      issue.title = testsupport::class_pools()[cls][i % 15];
      test.issues.push_back(issue);
    }
  }
  EvaluationReport report = evaluate_holdout(train, test, quick_config());
  REQUIRE(report.test_class_proportions.size() == 3);
  CHECK(report.test_class_proportions[0] == doctest::Approx(0.48).epsilon(1e-9));
  CHECK(report.test_class_proportions[1] == doctest::Approx(0.42).epsilon(1e-9));
  CHECK(report.test_class_proportions[2] == doctest::Approx(0.10).epsilon(1e-9));
}

TEST_CASE("report JSON round-trips") {
  Dataset dataset = testsupport::separable_dataset(10, 10);
  EvaluationReport report = cross_validate(dataset, 2, quick_config(), 5);
  EvaluationReport parsed = EvaluationReport::from_json(report.to_json());
  CHECK(parsed.to_json() == report.to_json());
}

TEST_CASE("compare_reports of identical reports is all zeros") {
  Dataset dataset = testsupport::separable_dataset(10, 12);
  EvaluationReport report = cross_validate(dataset, 2, quick_config(), 5);
  MetricDeltas deltas = compare_reports(report, report);
  for (size_t c = 0; c < deltas.labels.size(); ++c) {
    CHECK(*deltas.precision_pp[c] == 0.0);
    CHECK(*deltas.recall_pp[c] == 0.0);
    CHECK(*deltas.f_measure_pp[c] == 0.0);
  }
}

TEST_CASE("compare_reports computes signed percentage-point deltas") {
  EvaluationReport a, b;
  a.labels = b.labels = {"bug"};
  a.per_class.resize(1);
  b.per_class.resize(1);
  a.per_class[0].recall = 0.70;
  b.per_class[0].recall = 0.794;
  a.per_class[0].precision = 0.5;
  // b precision left undefined
  MetricDeltas deltas = compare_reports(a, b);
  REQUIRE(deltas.recall_pp[0].has_value());
  CHECK(*deltas.recall_pp[0] == doctest::Approx(9.4).epsilon(1e-9));
  CHECK(!deltas.precision_pp[0].has_value());
  CHECK(!deltas.f_measure_pp[0].has_value());
  CHECK(deltas.to_text_table().find("+9.40%") != std::string::npos);
  CHECK(deltas.to_text_table().find("n/a") != std::string::npos);
}

TEST_CASE("text table is column aligned and shows two decimals") {
  Dataset dataset = testsupport::separable_dataset(10, 13);
  EvaluationReport report = evaluate_holdout(dataset, dataset, quick_config());
  std::string table = report.to_text_table();
  CHECK(table.find("precision") != std::string::npos);
  CHECK(table.find("1.00") != std::string::npos);
  CHECK(table.find("macro F") != std::string::npos);
}
