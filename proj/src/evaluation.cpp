#include "issuetag/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <future>
#include <numeric>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "issuetag/text.hpp"

namespace issuetag {

uint64_t ConfusionMatrix::total() const {
  return std::accumulate(counts.begin(), counts.end(), uint64_t{0});
}

std::vector<ClassMetrics> metrics_from_confusion(const ConfusionMatrix& cm) {
  const size_t n = cm.labels.size();
  std::vector<ClassMetrics> out(n);
  for (size_t c = 0; c < n; ++c) {
    uint64_t tp = cm.at(c, c);
    uint64_t fp = 0;
    uint64_t fn = 0;
    for (size_t other = 0; other < n; ++other) {
      if (other == c) continue;
      fp += cm.at(other, c);
      fn += cm.at(c, other);
    }
    if (tp + fp > 0) {
      out[c].precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    }
    if (tp + fn > 0) {
      out[c].recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    }
    if (out[c].precision && out[c].recall && (*out[c].precision + *out[c].recall) > 0) {
      double p = *out[c].precision;
      double r = *out[c].recall;
      out[c].f_measure = 2.0 * p * r / (p + r);
    }
  }
  return out;
}

std::optional<double> macro_f_of(const std::vector<ClassMetrics>& per_class) {
  double sum = 0.0;
  size_t defined = 0;
  for (const auto& metrics : per_class) {
    if (metrics.f_measure) {
      sum += *metrics.f_measure;
      ++defined;
    }
  }
  if (defined == 0) return std::nullopt;
  return sum / static_cast<double>(defined);
}

namespace {

struct PreparedCorpus {
  std::vector<TokenSequence> tokens;  // aligned with dataset.issues
  std::vector<std::string> labels;    // sorted distinct labels
};

PreparedCorpus prepare(const Dataset& dataset) {
  if (!dataset.fully_labeled()) {
    throw ValidationError("evaluation requires every issue to be labeled");
  }
  PreparedCorpus prepared;
  prepared.tokens.reserve(dataset.issues.size());
  std::set<std::string> distinct;
  for (const auto& issue : dataset.issues) {
    RawIssue raw{issue.title, issue.body};
    prepared.tokens.push_back(tokenize(concatenate(raw)));
    distinct.insert(*issue.label);
  }
  prepared.labels.assign(distinct.begin(), distinct.end());
  return prepared;
}

size_t label_index(const std::vector<std::string>& labels, const std::string& label) {
  return static_cast<size_t>(std::find(labels.begin(), labels.end(), label) - labels.begin());
}

struct FoldResult {
  std::vector<std::pair<size_t, size_t>> pairs;  // (gold index, predicted index)
};

FoldResult run_fold(const Dataset& dataset, const PreparedCorpus& prepared, const FoldPlan& plan,
                    uint32_t fold, const TrainConfig& config) {
  std::vector<LabeledTokens> train_corpus;
  std::vector<size_t> test_indices;
  for (size_t i = 0; i < dataset.issues.size(); ++i) {
    uint32_t assigned = plan.assignment.at(dataset.issues[i].id);
    if (assigned == fold) {
      test_indices.push_back(i);
    } else {
      train_corpus.emplace_back(prepared.tokens[i], *dataset.issues[i].label);
    }
  }
  Model model;
  try {
    model = train(train_corpus, config, prepared.labels);
  } catch (const std::exception& e) {
    throw std::runtime_error("fold " + std::to_string(fold) + ": " + e.what());
  }
  FoldResult result;
  result.pairs.reserve(test_indices.size());
  for (size_t i : test_indices) {
    FeatureBag bag = featurize_for_config(prepared.tokens[i], model.vocab, config);
    Prediction pred = forward(bag, model);
    result.pairs.emplace_back(label_index(prepared.labels, *dataset.issues[i].label),
                              pred.argmax_index);
  }
  return result;
}

}  // namespace

EvaluationReport cross_validate(const Dataset& dataset, uint32_t k, const TrainConfig& config,
                                uint64_t seed, const EvaluateOptions& options) {
  FoldPlan plan = stratified_kfold(dataset, k, seed);
  PreparedCorpus prepared = prepare(dataset);

  std::vector<FoldResult> results(k);
  unsigned jobs = options.jobs == 0 ? 1 : options.jobs;
  if (jobs <= 1) {
    for (uint32_t fold = 0; fold < k; ++fold) {
      results[fold] = run_fold(dataset, prepared, plan, fold, config);
    }
  } else {
    for (uint32_t start = 0; start < k; start += jobs) {
      std::vector<std::future<FoldResult>> wave;
      for (uint32_t fold = start; fold < k && fold < start + jobs; ++fold) {
        wave.push_back(std::async(std::launch::async, run_fold, std::cref(dataset),
                                  std::cref(prepared), std::cref(plan), fold, std::cref(config)));
      }
      for (uint32_t fold = start; fold < k && fold < start + jobs; ++fold) {
        results[fold] = wave[fold - start].get();
      }
    }
  }

  EvaluationReport report;
  report.protocol = Protocol::CrossValidation;
  report.k = k;
  report.seed = seed;
  report.aggregation = options.aggregation;
  report.config_fingerprint = config.fingerprint();
  report.labels = prepared.labels;
  report.confusion = ConfusionMatrix(prepared.labels);
  for (const auto& result : results) {
    for (auto [gold, predicted] : result.pairs) {
      ++report.confusion.at(gold, predicted);
    }
  }

  if (options.aggregation == FoldAggregation::Pooled) {
    report.per_class = metrics_from_confusion(report.confusion);
    report.macro_f = macro_f_of(report.per_class);
  } else {
    const size_t n = prepared.labels.size();
    std::vector<double> p_sum(n, 0), r_sum(n, 0), f_sum(n, 0);
    std::vector<size_t> p_cnt(n, 0), r_cnt(n, 0), f_cnt(n, 0);
    double macro_sum = 0;
    size_t macro_cnt = 0;
    for (const auto& result : results) {
      ConfusionMatrix fold_cm(prepared.labels);
      for (auto [gold, predicted] : result.pairs) ++fold_cm.at(gold, predicted);
      auto fold_metrics = metrics_from_confusion(fold_cm);
      for (size_t c = 0; c < n; ++c) {
        if (fold_metrics[c].precision) { p_sum[c] += *fold_metrics[c].precision; ++p_cnt[c]; }
        if (fold_metrics[c].recall) { r_sum[c] += *fold_metrics[c].recall; ++r_cnt[c]; }
        if (fold_metrics[c].f_measure) { f_sum[c] += *fold_metrics[c].f_measure; ++f_cnt[c]; }
      }
      if (auto fold_macro = macro_f_of(fold_metrics)) {
        macro_sum += *fold_macro;
        ++macro_cnt;
      }
    }
    report.per_class.resize(n);
    for (size_t c = 0; c < n; ++c) {
      if (p_cnt[c]) report.per_class[c].precision = p_sum[c] / static_cast<double>(p_cnt[c]);
      if (r_cnt[c]) report.per_class[c].recall = r_sum[c] / static_cast<double>(r_cnt[c]);
      if (f_cnt[c]) report.per_class[c].f_measure = f_sum[c] / static_cast<double>(f_cnt[c]);
    }
    if (macro_cnt) report.macro_f = macro_sum / static_cast<double>(macro_cnt);
  }
  return report;
}

EvaluationReport evaluate_holdout(const Dataset& train_set, const Dataset& test_set,
                                  const TrainConfig& config) {
  PreparedCorpus train_prepared = prepare(train_set);
  PreparedCorpus test_prepared = prepare(test_set);

  std::set<std::string> all_labels(train_prepared.labels.begin(), train_prepared.labels.end());
  all_labels.insert(test_prepared.labels.begin(), test_prepared.labels.end());
  std::vector<std::string> labels(all_labels.begin(), all_labels.end());

  std::vector<LabeledTokens> train_corpus;
  train_corpus.reserve(train_set.issues.size());
  for (size_t i = 0; i < train_set.issues.size(); ++i) {
    train_corpus.emplace_back(train_prepared.tokens[i], *train_set.issues[i].label);
  }
  Model model = train(train_corpus, config, labels);

  EvaluationReport report;
  report.protocol = Protocol::Holdout;
  report.config_fingerprint = config.fingerprint();
  report.labels = labels;
  report.confusion = ConfusionMatrix(labels);
  for (size_t i = 0; i < test_set.issues.size(); ++i) {
    FeatureBag bag = featurize_for_config(test_prepared.tokens[i], model.vocab, config);
    Prediction pred = forward(bag, model);
    ++report.confusion.at(label_index(labels, *test_set.issues[i].label), pred.argmax_index);
  }
  report.per_class = metrics_from_confusion(report.confusion);
  report.macro_f = macro_f_of(report.per_class);

  auto hist = test_set.label_histogram();
  report.test_class_proportions.resize(labels.size(), 0.0);
  for (size_t c = 0; c < labels.size(); ++c) {
    auto it = hist.find(labels[c]);
    if (it != hist.end() && !test_set.issues.empty()) {
      report.test_class_proportions[c] =
          static_cast<double>(it->second) / static_cast<double>(test_set.issues.size());
    }
  }
  return report;
}

namespace {

nlohmann::ordered_json metrics_to_json(const ClassMetrics& metrics) {
  nlohmann::ordered_json j;
  j["precision"] = metrics.precision ? nlohmann::ordered_json(*metrics.precision)
                                     : nlohmann::ordered_json(nullptr);
  j["recall"] =
      metrics.recall ? nlohmann::ordered_json(*metrics.recall) : nlohmann::ordered_json(nullptr);
  j["f_measure"] = metrics.f_measure ? nlohmann::ordered_json(*metrics.f_measure)
                                     : nlohmann::ordered_json(nullptr);
  return j;
}

ClassMetrics metrics_from_json(const nlohmann::json& j) {
  ClassMetrics metrics;
  if (!j.at("precision").is_null()) metrics.precision = j.at("precision").get<double>();
  if (!j.at("recall").is_null()) metrics.recall = j.at("recall").get<double>();
  if (!j.at("f_measure").is_null()) metrics.f_measure = j.at("f_measure").get<double>();
  return metrics;
}

std::string format_metric(const std::optional<double>& value) {
  if (!value) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", *value);
  return buf;
}

std::string format_delta(const std::optional<double>& value_pp) {
  if (!value_pp) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%+.2f%%", *value_pp);
  return buf;
}

std::string render_table(const std::vector<std::string>& labels,
                         const std::vector<std::string>& row_names,
                         const std::vector<std::vector<std::string>>& cells,
                         const std::vector<std::string>& footer_lines) {
  std::vector<size_t> widths;
  widths.push_back(std::string("metric").size());
  for (const auto& name : row_names) widths[0] = std::max(widths[0], name.size());
  for (size_t c = 0; c < labels.size(); ++c) {
    size_t w = labels[c].size();
    for (const auto& row : cells) w = std::max(w, row[c].size());
    widths.push_back(w);
  }
  std::ostringstream out;
  auto emit_row = [&](const std::string& head, const std::vector<std::string>& row) {
    out << head;
    out << std::string(widths[0] - head.size(), ' ');
    for (size_t c = 0; c < row.size(); ++c) {
      out << "  " << row[c] << std::string(widths[c + 1] - row[c].size(), ' ');
    }
    out << '\n';
  };
  emit_row("metric", labels);
  for (size_t r = 0; r < row_names.size(); ++r) emit_row(row_names[r], cells[r]);
  for (const auto& line : footer_lines) out << line << '\n';
  return out.str();
}

}  // namespace

std::string EvaluationReport::to_json() const {
  nlohmann::ordered_json j;
  j["schema"] = "issuetag-report-v1";
  nlohmann::ordered_json protocol_json;
  protocol_json["kind"] = protocol == Protocol::CrossValidation ? "cv" : "holdout";
  if (protocol == Protocol::CrossValidation) {
    protocol_json["k"] = k;
    protocol_json["seed"] = seed;
    protocol_json["aggregation"] =
        aggregation == FoldAggregation::Pooled ? "pooled" : "per_fold_mean";
  }
  j["protocol"] = protocol_json;
  j["config_fingerprint"] = config_fingerprint;
  j["labels"] = labels;
  nlohmann::ordered_json confusion_json = nlohmann::ordered_json::array();
  for (size_t g = 0; g < labels.size(); ++g) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (size_t p = 0; p < labels.size(); ++p) row.push_back(confusion.at(g, p));
    confusion_json.push_back(row);
  }
  j["confusion"] = confusion_json;
  nlohmann::ordered_json per_class_json;
  for (size_t c = 0; c < labels.size(); ++c) {
    per_class_json[labels[c]] = metrics_to_json(per_class[c]);
  }
  j["per_class"] = per_class_json;
  j["macro_f"] = macro_f ? nlohmann::ordered_json(*macro_f) : nlohmann::ordered_json(nullptr);
  if (protocol == Protocol::Holdout) {
    nlohmann::ordered_json proportions;
    for (size_t c = 0; c < labels.size(); ++c) {
      proportions[labels[c]] = test_class_proportions[c];
    }
    j["test_class_proportions"] = proportions;
  }
  return j.dump(2) + "\n";
}

EvaluationReport EvaluationReport::from_json(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  if (j.at("schema").get<std::string>() != "issuetag-report-v1") {
    throw std::runtime_error("unknown report schema");
  }
  EvaluationReport report;
  const auto& protocol_json = j.at("protocol");
  report.protocol = protocol_json.at("kind").get<std::string>() == "cv"
                        ? Protocol::CrossValidation
                        : Protocol::Holdout;
  if (report.protocol == Protocol::CrossValidation) {
    report.k = protocol_json.at("k").get<uint32_t>();
    report.seed = protocol_json.at("seed").get<uint64_t>();
    report.aggregation = protocol_json.at("aggregation").get<std::string>() == "pooled"
                             ? FoldAggregation::Pooled
                             : FoldAggregation::PerFoldMean;
  }
  report.config_fingerprint = j.at("config_fingerprint").get<std::string>();
  report.labels = j.at("labels").get<std::vector<std::string>>();
  report.confusion = ConfusionMatrix(report.labels);
  const auto& confusion_json = j.at("confusion");
  for (size_t g = 0; g < report.labels.size(); ++g) {
    for (size_t p = 0; p < report.labels.size(); ++p) {
      report.confusion.at(g, p) = confusion_json.at(g).at(p).get<uint64_t>();
    }
  }
  report.per_class.resize(report.labels.size());
  for (size_t c = 0; c < report.labels.size(); ++c) {
    report.per_class[c] = metrics_from_json(j.at("per_class").at(report.labels[c]));
  }
  if (!j.at("macro_f").is_null()) report.macro_f = j.at("macro_f").get<double>();
  if (j.contains("test_class_proportions")) {
    report.test_class_proportions.resize(report.labels.size());
    for (size_t c = 0; c < report.labels.size(); ++c) {
      report.test_class_proportions[c] =
          j.at("test_class_proportions").at(report.labels[c]).get<double>();
    }
  }
  return report;
}

std::string EvaluationReport::to_text_table() const {
  std::vector<std::vector<std::string>> cells(3, std::vector<std::string>(labels.size()));
  for (size_t c = 0; c < labels.size(); ++c) {
    cells[0][c] = format_metric(per_class[c].precision);
    cells[1][c] = format_metric(per_class[c].recall);
    cells[2][c] = format_metric(per_class[c].f_measure);
  }
  std::vector<std::string> footer;
  footer.push_back("macro F: " + format_metric(macro_f));
  if (protocol == Protocol::Holdout && !test_class_proportions.empty()) {
    std::string line = "test proportions:";
    for (size_t c = 0; c < labels.size(); ++c) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), " %s=%.1f%%", labels[c].c_str(),
                    test_class_proportions[c] * 100.0);
      line += buf;
    }
    footer.push_back(line);
  }
  return render_table(labels, {"precision", "recall", "f-measure"}, cells, footer);
}

MetricDeltas compare_reports(const EvaluationReport& a, const EvaluationReport& b) {
  if (a.labels != b.labels) {
    throw std::invalid_argument("compare_reports: label sets differ");
  }
  MetricDeltas deltas;
  deltas.labels = a.labels;
  auto diff = [](const std::optional<double>& lhs,
                 const std::optional<double>& rhs) -> std::optional<double> {
    if (!lhs || !rhs) return std::nullopt;
    return (*rhs - *lhs) * 100.0;
  };
  for (size_t c = 0; c < a.labels.size(); ++c) {
    deltas.precision_pp.push_back(diff(a.per_class[c].precision, b.per_class[c].precision));
    deltas.recall_pp.push_back(diff(a.per_class[c].recall, b.per_class[c].recall));
    deltas.f_measure_pp.push_back(diff(a.per_class[c].f_measure, b.per_class[c].f_measure));
  }
  return deltas;
}

std::string MetricDeltas::to_text_table() const {
  std::vector<std::vector<std::string>> cells(3, std::vector<std::string>(labels.size()));
  for (size_t c = 0; c < labels.size(); ++c) {
    cells[0][c] = format_delta(precision_pp[c]);
    cells[1][c] = format_delta(recall_pp[c]);
    cells[2][c] = format_delta(f_measure_pp[c]);
  }
  return render_table(labels, {"precision", "recall", "f-measure"}, cells, {});
}

}  // namespace issuetag
