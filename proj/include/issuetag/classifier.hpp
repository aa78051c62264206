#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "issuetag/text.hpp"

namespace issuetag {

// Tokens retained after minCount pruning, with dense ids assigned in
// descending corpus frequency (ties broken lexicographically).
class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::vector<std::string> words, std::vector<uint64_t> counts, uint32_t min_count);

  std::optional<uint32_t> id_of(const std::string& token) const {
    auto it = word_to_id_.find(token);
    if (it == word_to_id_.end()) return std::nullopt;
    return it->second;
  }

  uint64_t size() const { return id_to_word_.size(); }
  const std::string& word(uint32_t id) const { return id_to_word_[id]; }
  uint64_t count(uint32_t id) const { return counts_[id]; }
  uint32_t min_count() const { return min_count_; }
  const std::vector<std::string>& words() const { return id_to_word_; }
  const std::vector<uint64_t>& counts() const { return counts_; }

 private:
  std::vector<std::string> id_to_word_;
  std::vector<uint64_t> counts_;
  std::unordered_map<std::string, uint32_t> word_to_id_;
  uint32_t min_count_ = 1;
};

Vocabulary build_vocabulary(const std::vector<TokenSequence>& corpus, uint32_t min_count);

enum class LossMode : uint8_t { FlatSoftmax = 0, HierarchicalSoftmax = 1 };

struct TrainConfig {
  uint32_t dim = 100;
  uint32_t epochs = 5;
  double learning_rate = 0.1;  // decays linearly to 0 over all updates
  uint32_t min_count = 14;
  uint32_t word_ngrams = 1;  // 1 = word unigrams only
  // Character n-grams are off by default; the deployed model keeps the input
  // matrix at vocabulary size so it fits the small-disk budget. Enabling them
  // (conventional range 3..6) adds hashing_buckets rows.
  uint32_t char_ngram_min = 0;
  uint32_t char_ngram_max = 0;
  uint64_t hashing_buckets = 2'000'000;
  LossMode loss_mode = LossMode::FlatSoftmax;
  uint64_t seed = 42;

  bool char_ngrams_enabled() const { return char_ngram_min >= 1 && char_ngram_max >= char_ngram_min; }
  // Bucket rows materialized in the input matrix. Zero when no hashed
  // features (char n-grams or word n-grams > 1) can be emitted.
  uint64_t effective_buckets() const {
    return (char_ngrams_enabled() || word_ngrams > 1) ? hashing_buckets : 0;
  }
  FeatureOptions feature_options() const {
    FeatureOptions opts;
    opts.char_ngram_min = char_ngram_min;
    opts.char_ngram_max = char_ngram_max;
    opts.hashing_buckets = hashing_buckets;
    return opts;
  }
  // Stable hash of the canonical config rendering, hex-encoded.
  std::string fingerprint() const;
};

// Row-major float32 matrix; accumulation happens in double at call sites.
class Matrix {
 public:
  Matrix() = default;
  Matrix(uint64_t rows, uint64_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0f) {}

  uint64_t rows() const { return rows_; }
  uint64_t cols() const { return cols_; }
  float& at(uint64_t r, uint64_t c) { return data_[r * cols_ + c]; }
  float at(uint64_t r, uint64_t c) const { return data_[r * cols_ + c]; }
  const float* row(uint64_t r) const { return data_.data() + r * cols_; }
  float* row(uint64_t r) { return data_.data() + r * cols_; }
  const std::vector<float>& data() const { return data_; }
  std::vector<float>& data() { return data_; }
  bool operator==(const Matrix&) const = default;

 private:
  uint64_t rows_ = 0;
  uint64_t cols_ = 0;
  std::vector<float> data_;
};

struct Prediction {
  std::vector<double> scores;  // per label, sums to 1
  size_t argmax_index = 0;
  std::string argmax_label;
};

struct Model {
  Vocabulary vocab;
  std::vector<std::string> labels;        // ordered, unique
  std::vector<uint64_t> label_counts;     // training occurrences per label
  Matrix input_weights;   // (vocab size + bucket rows) x dim feature embeddings
  Matrix output_weights;  // dim x labels
  TrainConfig config;

  uint64_t feature_rows() const { return input_weights.rows(); }
  std::string fingerprint() const;
};

// Numerically stable softmax (double accumulation, max-shifted).
std::vector<double> softmax(const std::vector<double>& logits);

// Count-weighted mean of input embedding rows over the bag.
std::vector<double> hidden_vector(const FeatureBag& bag, const Model& model);

Prediction forward(const FeatureBag& bag, const Model& model);

// Per-label log-probabilities, routed through the configured loss mode
// (flat softmax, or the Huffman-tree factored equivalent).
std::vector<double> log_probabilities(const FeatureBag& bag, const Model& model);

using LabeledBag = std::pair<FeatureBag, uint32_t>;

// Mean negative log-probability of the true labels.
double loss(const std::vector<LabeledBag>& dataset, const Model& model);

struct LossGradients {
  std::vector<std::vector<double>> d_input;   // same shape as input_weights
  std::vector<std::vector<double>> d_output;  // same shape as output_weights
};

// Exact batch gradient of `loss`; the finite-difference check in the test
// suite compares against this.
LossGradients loss_gradients(const std::vector<LabeledBag>& dataset, const Model& model);

using LabeledTokens = std::pair<TokenSequence, std::string>;

// Single-threaded SGD on the averaged-embedding objective. Input embeddings
// start uniform in [-1/dim, 1/dim] from config.seed, output weights at zero;
// the learning rate decays linearly to zero across epochs * corpus updates.
// `label_set`, when nonempty, fixes the label order and rejects examples with
// labels outside it; otherwise labels are the sorted distinct corpus labels.
Model train(const std::vector<LabeledTokens>& corpus, const TrainConfig& config,
            const std::vector<std::string>& label_set = {});

// Featurization used by training and prediction: word ids plus char-n-gram
// buckets per config, plus hashed word n-grams when config.word_ngrams > 1.
FeatureBag featurize_for_config(const TokenSequence& tokens, const Vocabulary& vocab,
                                const TrainConfig& config);

Prediction predict_text(const std::string& text, const Model& model);

class ModelFormatError : public std::runtime_error {
 public:
  enum class Kind { BadMagic, UnknownVersion, Truncated };
  ModelFormatError(Kind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Versioned binary format, magic "ITGM", little-endian throughout, matrices
// stored as 32-bit floats. Round-trip preserves predictions bit-exactly.
void save(const Model& model, const std::string& path);
Model load(const std::string& path);

}  // namespace issuetag
