#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace issuetag {

inline const std::vector<std::string>& canonical_labels() {
  static const std::vector<std::string> labels = {"bug", "enhancement", "question"};
  return labels;
}

struct LabeledIssue {
  std::string id;
  std::string title;
  std::string body;
  std::optional<std::string> label;  // one of the canonical names when present
  std::optional<std::string> source_repo;
};

struct Dataset {
  std::vector<LabeledIssue> issues;
  std::string provenance;

  size_t size() const { return issues.size(); }
  bool fully_labeled() const;
  // label -> number of issues carrying it
  std::unordered_map<std::string, size_t> label_histogram() const;
};

struct FoldPlan {
  uint32_t k = 0;
  std::unordered_map<std::string, uint32_t> assignment;  // issue id -> fold
};

// CSV parse failure carrying the 1-based physical line number.
class CsvError : public std::runtime_error {
 public:
  CsvError(size_t line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
  size_t line() const { return line_; }

 private:
  size_t line_;
};

// Content rejection (unknown labels, duplicate ids, class too small, ...).
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& message) : std::runtime_error(message) {}
};

// Case-insensitive exact match against the three canonical labels;
// anything else (including "kind/bug") is rejected as nullopt.
std::optional<std::string> normalize_label(const std::string& raw);

struct CsvLoadResult {
  Dataset dataset;
  size_t multi_label_skipped = 0;  // rows listing several canonical labels
};

// Reads the `id,label,title,body` schema (RFC 4180, embedded newlines
// allowed). An empty label field yields an unlabeled issue. Rows whose label
// field lists more than one canonical label (comma-separated) are skipped and
// counted; single unknown labels raise ValidationError naming the rows.
CsvLoadResult load_csv(const std::string& path);
Dataset load_csv_dataset(const std::string& path);

void save_csv(const Dataset& dataset, const std::string& path);

// fastText line format: "__label__<name> <text>", one line per issue,
// internal newlines replaced by spaces.
void export_fasttext(const Dataset& dataset, const std::string& path);
Dataset load_fasttext(const std::string& path);

// Uniform per-class sample without replacement, per_class from each canonical
// class, reproducible for a given seed. Class pools are keyed on issue ids so
// row order does not matter.
Dataset balance(const Dataset& dataset, size_t per_class, uint64_t seed);

// Seeded per-class round-robin assignment; per-class fold sizes differ by at
// most one and the folds partition the dataset.
FoldPlan stratified_kfold(const Dataset& dataset, uint32_t k, uint64_t seed);

struct TfidfSummary {
  size_t documents = 0;
  size_t terms = 0;
  size_t nonzeros = 0;
  std::string matrix_path;
  std::string vocabulary_path;
};

// Document-term matrix with tf * ln(N/df) weights, one row per issue
// ("<label> index:weight ..."), plus a "<index>\t<term>" vocabulary sidecar.
TfidfSummary export_tfidf(const Dataset& dataset, const std::string& path);

}  // namespace issuetag
