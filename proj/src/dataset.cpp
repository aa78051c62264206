#include "issuetag/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "issuetag/rng.hpp"
#include "issuetag/text.hpp"

namespace issuetag {

bool Dataset::fully_labeled() const {
  return std::all_of(issues.begin(), issues.end(),
                     [](const LabeledIssue& issue) { return issue.label.has_value(); });
}

std::unordered_map<std::string, size_t> Dataset::label_histogram() const {
  std::unordered_map<std::string, size_t> hist;
  for (const auto& issue : issues) {
    if (issue.label) ++hist[*issue.label];
  }
  return hist;
}

std::optional<std::string> normalize_label(const std::string& raw) {
  std::string lowered;
  lowered.reserve(raw.size());
  for (char c : raw) {
    lowered.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c);
  }
  for (const auto& canonical : canonical_labels()) {
    if (lowered == canonical) return canonical;
  }
  return std::nullopt;
}

namespace {

// RFC 4180 record reader. Returns false at end of input. `line` tracks the
// physical line where the current record started, for error messages.
class CsvReader {
 public:
  explicit CsvReader(std::istream& in) : in_(in) {}

  size_t record_line() const { return record_line_; }

  bool next(std::vector<std::string>& fields) {
    fields.clear();
    int c = in_.get();
    if (c == EOF) return false;
    record_line_ = line_;
    std::string field;
    bool in_quotes = false;
    bool quoted_field = false;
    for (;;) {
      if (c == EOF) {
        if (in_quotes) throw CsvError(record_line_, "unterminated quoted field");
        fields.push_back(std::move(field));
        return true;
      }
      char ch = static_cast<char>(c);
      if (ch == '\n') ++line_;
      if (in_quotes) {
        if (ch == '"') {
          if (in_.peek() == '"') {
            in_.get();
            field.push_back('"');
          } else {
            in_quotes = false;
          }
        } else {
          field.push_back(ch);
        }
      } else if (ch == '"') {
        if (!field.empty() || quoted_field) {
          throw CsvError(line_, "unexpected quote inside unquoted field");
        }
        in_quotes = true;
        quoted_field = true;
      } else if (ch == ',') {
        fields.push_back(std::move(field));
        field.clear();
        quoted_field = false;
      } else if (ch == '\r' || ch == '\n') {
        if (ch == '\r' && in_.peek() == '\n') {
          in_.get();
          ++line_;
        }
        fields.push_back(std::move(field));
        return true;
      } else {
        if (quoted_field) {
          throw CsvError(line_, "data after closing quote");
        }
        field.push_back(ch);
      }
      c = in_.get();
    }
  }

 private:
  std::istream& in_;
  size_t line_ = 1;
  size_t record_line_ = 1;
};

bool needs_quoting(const std::string& field) {
  return field.find_first_of(",\"\r\n") != std::string::npos;
}

void write_field(std::ostream& out, const std::string& field) {
  if (!needs_quoting(field)) {
    out << field;
    return;
  }
  out << '"';
  for (char c : field) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

void strip_bom(std::string& s) {
  if (s.size() >= 3 && static_cast<unsigned char>(s[0]) == 0xEF &&
      static_cast<unsigned char>(s[1]) == 0xBB && static_cast<unsigned char>(s[2]) == 0xBF) {
    s.erase(0, 3);
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string current;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  parts.push_back(current);
  return parts;
}

}  // namespace

CsvLoadResult load_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError("cannot open \"" + path + "\"");
  }
  CsvReader reader(in);
  std::vector<std::string> fields;
  if (!reader.next(fields)) {
    throw CsvError(1, "empty file, expected header id,label,title,body");
  }
  if (!fields.empty()) strip_bom(fields[0]);
  const std::vector<std::string> expected = {"id", "label", "title", "body"};
  if (fields != expected) {
    throw CsvError(1, "bad header, expected id,label,title,body");
  }

  CsvLoadResult result;
  result.dataset.provenance = path;
  std::set<std::string> seen_ids;
  std::vector<std::string> bad_label_rows;
  std::vector<std::string> duplicate_rows;
  while (reader.next(fields)) {
    size_t line = reader.record_line();
    if (fields.size() == 1 && fields[0].empty()) continue;  // trailing blank line
    if (fields.size() != 4) {
      throw CsvError(line, "expected 4 fields, got " + std::to_string(fields.size()));
    }
    LabeledIssue issue;
    issue.id = fields[0];
    issue.title = fields[2];
    issue.body = fields[3];
    const std::string& raw_label = fields[1];
    if (!raw_label.empty()) {
      auto parts = split(raw_label, ',');
      if (parts.size() > 1) {
        bool all_canonical = std::all_of(parts.begin(), parts.end(), [](const std::string& p) {
          return normalize_label(p).has_value();
        });
        if (all_canonical) {
          ++result.multi_label_skipped;
          continue;
        }
        bad_label_rows.push_back("line " + std::to_string(line) + " (\"" + raw_label + "\")");
        continue;
      }
      auto canonical = normalize_label(raw_label);
      if (!canonical) {
        bad_label_rows.push_back("line " + std::to_string(line) + " (\"" + raw_label + "\")");
        continue;
      }
      issue.label = *canonical;
    }
    if (!seen_ids.insert(issue.id).second) {
      duplicate_rows.push_back("line " + std::to_string(line) + " (id \"" + issue.id + "\")");
      continue;
    }
    result.dataset.issues.push_back(std::move(issue));
  }
  if (!bad_label_rows.empty()) {
    std::string message = "unknown labels at: ";
    for (size_t i = 0; i < bad_label_rows.size() && i < 20; ++i) {
      if (i > 0) message += ", ";
      message += bad_label_rows[i];
    }
    if (bad_label_rows.size() > 20) {
      message += ", ... (" + std::to_string(bad_label_rows.size()) + " rows total)";
    }
    throw ValidationError(message);
  }
  if (!duplicate_rows.empty()) {
    std::string message = "duplicate issue ids at: ";
    for (size_t i = 0; i < duplicate_rows.size() && i < 20; ++i) {
      if (i > 0) message += ", ";
      message += duplicate_rows[i];
    }
    throw ValidationError(message);
  }
  return result;
}

Dataset load_csv_dataset(const std::string& path) { return load_csv(path).dataset; }

void save_csv(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open \"" + path + "\" for writing");
  }
  out << "id,label,title,body\n";
  for (const auto& issue : dataset.issues) {
    write_field(out, issue.id);
    out << ',';
    write_field(out, issue.label.value_or(""));
    out << ',';
    write_field(out, issue.title);
    out << ',';
    write_field(out, issue.body);
    out << '\n';
  }
  if (!out.flush()) {
    throw std::runtime_error("write failed for \"" + path + "\"");
  }
}

namespace {

std::string flatten_whitespace(const std::string& text) {
  std::string out = text;
  for (char& c : out) {
    if (c == '\n' || c == '\r' || c == '\t') c = ' ';
  }
  return out;
}

}  // namespace

void export_fasttext(const Dataset& dataset, const std::string& path) {
  if (!dataset.fully_labeled()) {
    throw ValidationError("fastText export requires every issue to be labeled");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open \"" + path + "\" for writing");
  }
  for (const auto& issue : dataset.issues) {
    RawIssue raw{issue.title, issue.body};
    out << "__label__" << *issue.label << ' ' << flatten_whitespace(concatenate(raw)) << '\n';
  }
  if (!out.flush()) {
    throw std::runtime_error("write failed for \"" + path + "\"");
  }
}

Dataset load_fasttext(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("cannot open \"" + path + "\"");
  }
  Dataset dataset;
  dataset.provenance = path;
  std::string line;
  size_t line_no = 0;
  constexpr std::string_view kPrefix = "__label__";
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind(kPrefix, 0) != 0) {
      throw ValidationError("line " + std::to_string(line_no) + ": missing __label__ prefix");
    }
    size_t space = line.find(' ');
    std::string label = line.substr(kPrefix.size(),
                                    space == std::string::npos ? std::string::npos
                                                               : space - kPrefix.size());
    if (label.empty()) {
      throw ValidationError("line " + std::to_string(line_no) + ": empty label");
    }
    LabeledIssue issue;
    issue.id = "line-" + std::to_string(line_no);
    issue.label = label;
    issue.title = space == std::string::npos ? "" : line.substr(space + 1);
    dataset.issues.push_back(std::move(issue));
  }
  return dataset;
}

namespace {

// Issues of one class, ordered by id so sampling ignores row order.
std::vector<size_t> class_pool(const Dataset& dataset, const std::string& label) {
  std::vector<size_t> pool;
  for (size_t i = 0; i < dataset.issues.size(); ++i) {
    if (dataset.issues[i].label == label) pool.push_back(i);
  }
  std::sort(pool.begin(), pool.end(), [&dataset](size_t a, size_t b) {
    return dataset.issues[a].id < dataset.issues[b].id;
  });
  return pool;
}

}  // namespace

Dataset balance(const Dataset& dataset, size_t per_class, uint64_t seed) {
  Dataset out;
  out.provenance = "balanced(" + std::to_string(per_class) + " per class, seed " +
                   std::to_string(seed) + ") from " + dataset.provenance;
  for (size_t c = 0; c < canonical_labels().size(); ++c) {
    const std::string& label = canonical_labels()[c];
    std::vector<size_t> pool = class_pool(dataset, label);
    if (pool.size() < per_class) {
      throw ValidationError("class \"" + label + "\" has " + std::to_string(pool.size()) +
                            " issues, need " + std::to_string(per_class));
    }
    Rng rng = Rng::derive(seed, c);
    for (size_t idx : rng.sample_indices(pool.size(), per_class)) {
      out.issues.push_back(dataset.issues[pool[idx]]);
    }
  }
  return out;
}

FoldPlan stratified_kfold(const Dataset& dataset, uint32_t k, uint64_t seed) {
  if (k < 2) {
    throw std::invalid_argument("stratified_kfold: k must be >= 2");
  }
  if (!dataset.fully_labeled()) {
    throw ValidationError("stratified_kfold requires every issue to be labeled");
  }
  std::map<std::string, std::vector<std::string>> ids_by_label;
  for (const auto& issue : dataset.issues) {
    ids_by_label[*issue.label].push_back(issue.id);
  }
  FoldPlan plan;
  plan.k = k;
  size_t class_index = 0;
  for (auto& [label, ids] : ids_by_label) {
    if (ids.size() < k) {
      throw ValidationError("class \"" + label + "\" has " + std::to_string(ids.size()) +
                            " issues, need at least k=" + std::to_string(k));
    }
    std::sort(ids.begin(), ids.end());
    Rng rng = Rng::derive(seed, class_index++);
    rng.shuffle(ids);
    for (size_t i = 0; i < ids.size(); ++i) {
      plan.assignment.emplace(ids[i], static_cast<uint32_t>(i % k));
    }
  }
  if (plan.assignment.size() != dataset.issues.size()) {
    throw ValidationError("stratified_kfold: duplicate issue ids in dataset");
  }
  return plan;
}

TfidfSummary export_tfidf(const Dataset& dataset, const std::string& path) {
  if (!dataset.fully_labeled()) {
    throw ValidationError("tf-idf export requires every issue to be labeled");
  }
  const size_t n_docs = dataset.issues.size();
  std::vector<std::map<std::string, uint64_t>> term_counts(n_docs);
  std::map<std::string, uint64_t> document_frequency;
  for (size_t i = 0; i < n_docs; ++i) {
    RawIssue raw{dataset.issues[i].title, dataset.issues[i].body};
    for (const auto& token : tokenize(concatenate(raw))) {
      ++term_counts[i][token];
    }
    for (const auto& [term, count] : term_counts[i]) {
      ++document_frequency[term];
    }
  }
  std::map<std::string, size_t> term_index;
  size_t next_index = 0;
  for (const auto& [term, df] : document_frequency) {
    term_index.emplace(term, next_index++);
  }

  TfidfSummary summary;
  summary.documents = n_docs;
  summary.terms = term_index.size();
  summary.matrix_path = path;
  summary.vocabulary_path = path + ".vocab";

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open \"" + path + "\" for writing");
  }
  char buf[64];
  for (size_t i = 0; i < n_docs; ++i) {
    out << *dataset.issues[i].label;
    std::map<size_t, double> row;
    for (const auto& [term, tf] : term_counts[i]) {
      double idf = std::log(static_cast<double>(n_docs) /
                            static_cast<double>(document_frequency[term]));
      row.emplace(term_index[term], static_cast<double>(tf) * idf);
    }
    for (const auto& [index, weight] : row) {
      std::snprintf(buf, sizeof(buf), "%zu:%.17g", index, weight);
      out << ' ' << buf;
      ++summary.nonzeros;
    }
    out << '\n';
  }
  if (!out.flush()) {
    throw std::runtime_error("write failed for \"" + path + "\"");
  }

  std::ofstream vocab_out(summary.vocabulary_path, std::ios::binary | std::ios::trunc);
  if (!vocab_out) {
    throw std::runtime_error("cannot open \"" + summary.vocabulary_path + "\" for writing");
  }
  for (const auto& [term, index] : term_index) {
    vocab_out << index << '\t' << term << '\n';
  }
  if (!vocab_out.flush()) {
    throw std::runtime_error("write failed for \"" + summary.vocabulary_path + "\"");
  }
  return summary;
}

}  // namespace issuetag
