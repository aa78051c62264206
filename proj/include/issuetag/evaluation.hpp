#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "issuetag/classifier.hpp"
#include "issuetag/dataset.hpp"

namespace issuetag {

// Rows are gold labels, columns are predictions.
struct ConfusionMatrix {
  std::vector<std::string> labels;
  std::vector<uint64_t> counts;  // row-major labels.size() x labels.size()

  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::vector<std::string> label_names)
      : labels(std::move(label_names)), counts(labels.size() * labels.size(), 0) {}

  uint64_t& at(size_t gold, size_t predicted) { return counts[gold * labels.size() + predicted]; }
  uint64_t at(size_t gold, size_t predicted) const {
    return counts[gold * labels.size() + predicted];
  }
  uint64_t total() const;
};

// 0/0 cases keep the nullopt "undefined" marker instead of fabricating 0 or 1.
struct ClassMetrics {
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f_measure;
};

std::vector<ClassMetrics> metrics_from_confusion(const ConfusionMatrix& cm);

enum class Protocol { CrossValidation, Holdout };
enum class FoldAggregation { Pooled, PerFoldMean };

struct EvaluationReport {
  Protocol protocol = Protocol::CrossValidation;
  uint32_t k = 0;          // cross-validation only
  uint64_t seed = 0;       // fold seed (cross-validation only)
  FoldAggregation aggregation = FoldAggregation::Pooled;
  std::string config_fingerprint;
  std::vector<std::string> labels;
  ConfusionMatrix confusion;  // pooled over folds / the holdout test set
  std::vector<ClassMetrics> per_class;
  std::optional<double> macro_f;  // unweighted mean of defined per-class F
  std::vector<double> test_class_proportions;  // holdout only, by label order

  std::string to_json() const;
  static EvaluationReport from_json(const std::string& json_text);
  // Aligned table in the style of the headline result tables.
  std::string to_text_table() const;
};

std::optional<double> macro_f_of(const std::vector<ClassMetrics>& per_class);

struct EvaluateOptions {
  FoldAggregation aggregation = FoldAggregation::Pooled;
  unsigned jobs = 1;  // fold-level parallelism; results are order-independent
};

// Trains on k-1 folds, predicts the held-out fold, pools every out-of-fold
// prediction into one confusion matrix (or averages per-fold metrics).
EvaluationReport cross_validate(const Dataset& dataset, uint32_t k, const TrainConfig& config,
                                uint64_t seed, const EvaluateOptions& options = {});

EvaluationReport evaluate_holdout(const Dataset& train_set, const Dataset& test_set,
                                  const TrainConfig& config);

// Signed metric differences (b - a) in percentage points, per class.
struct MetricDeltas {
  std::vector<std::string> labels;
  std::vector<std::optional<double>> precision_pp;
  std::vector<std::optional<double>> recall_pp;
  std::vector<std::optional<double>> f_measure_pp;

  std::string to_text_table() const;
};

MetricDeltas compare_reports(const EvaluationReport& a, const EvaluationReport& b);

}  // namespace issuetag
