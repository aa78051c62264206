#include "issuetag/classifier.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include "issuetag/rng.hpp"

namespace issuetag {

Vocabulary::Vocabulary(std::vector<std::string> words, std::vector<uint64_t> counts,
                       uint32_t min_count)
    : id_to_word_(std::move(words)), counts_(std::move(counts)), min_count_(min_count) {
  word_to_id_.reserve(id_to_word_.size());
  for (uint32_t id = 0; id < id_to_word_.size(); ++id) {
    word_to_id_.emplace(id_to_word_[id], id);
  }
}

Vocabulary build_vocabulary(const std::vector<TokenSequence>& corpus, uint32_t min_count) {
  std::unordered_map<std::string, uint64_t> freq;
  for (const auto& tokens : corpus) {
    for (const auto& token : tokens) ++freq[token];
  }
  std::vector<std::pair<std::string, uint64_t>> retained;
  for (auto& [word, count] : freq) {
    if (count >= min_count) retained.emplace_back(word, count);
  }
  std::sort(retained.begin(), retained.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> words;
  std::vector<uint64_t> counts;
  words.reserve(retained.size());
  counts.reserve(retained.size());
  for (auto& [word, count] : retained) {
    words.push_back(std::move(word));
    counts.push_back(count);
  }
  return Vocabulary(std::move(words), std::move(counts), min_count);
}

std::string TrainConfig::fingerprint() const {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "dim=%u;epochs=%u;lr=%.17g;min_count=%u;word_ngrams=%u;char_min=%u;char_max=%u;"
                "buckets=%llu;loss=%s;seed=%llu",
                dim, epochs, learning_rate, min_count, word_ngrams, char_ngram_min, char_ngram_max,
                static_cast<unsigned long long>(hashing_buckets),
                loss_mode == LossMode::FlatSoftmax ? "flat" : "hier",
                static_cast<unsigned long long>(seed));
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(fnv1a64(buf)));
  return hex;
}

std::string Model::fingerprint() const {
  uint64_t h = fnv1a64(config.fingerprint());
  auto mix = [&h](std::string_view bytes) {
    for (unsigned char c : bytes) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& label : labels) {
    mix(label);
    mix(";");
  }
  for (const auto& word : vocab.words()) {
    mix(word);
    mix(";");
  }
  auto mix_matrix = [&](const Matrix& m) {
    mix(std::string_view(reinterpret_cast<const char*>(m.data().data()),
                         m.data().size() * sizeof(float)));
  };
  mix_matrix(input_weights);
  mix_matrix(output_weights);
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

std::vector<double> softmax(const std::vector<double>& logits) {
  double max_logit = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double denom = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - max_logit);
    denom += out[i];
  }
  for (double& v : out) v /= denom;
  return out;
}

std::vector<double> hidden_vector(const FeatureBag& bag, const Model& model) {
  const uint64_t dim = model.input_weights.cols();
  std::vector<double> hidden(dim, 0.0);
  uint64_t total = bag.total_feature_count();
  if (total == 0) return hidden;
  for (const auto& entry : bag.entries) {
    const float* row = model.input_weights.row(entry.id);
    for (uint64_t d = 0; d < dim; ++d) {
      hidden[d] += static_cast<double>(entry.count) * row[d];
    }
  }
  for (double& v : hidden) v /= static_cast<double>(total);
  return hidden;
}

namespace {

std::vector<double> logits_of(const std::vector<double>& hidden, const Model& model) {
  const uint64_t dim = model.output_weights.rows();
  const uint64_t num_labels = model.output_weights.cols();
  std::vector<double> logits(num_labels, 0.0);
  for (uint64_t d = 0; d < dim; ++d) {
    const float* row = model.output_weights.row(d);
    for (uint64_t l = 0; l < num_labels; ++l) {
      logits[l] += hidden[d] * row[l];
    }
  }
  return logits;
}

double log_sum_exp(double a, double b) {
  double hi = std::max(a, b);
  double lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

double log_sum_exp(const std::vector<double>& xs) {
  double hi = *std::max_element(xs.begin(), xs.end());
  double sum = 0.0;
  for (double x : xs) sum += std::exp(x - hi);
  return hi + std::log(sum);
}

// Huffman tree over label frequencies. Leaves are label ids; internal nodes
// follow. The factored form scores each binary branch with a softmax over the
// children's subtree log-sum-exp scores, which telescopes to the flat softmax
// distribution (the hierarchy is an evaluation route, not a different model).
struct HuffmanTree {
  struct Node {
    uint64_t count = 0;
    int left = -1;
    int right = -1;
  };
  std::vector<Node> nodes;
  int root = -1;
};

HuffmanTree build_huffman(const std::vector<uint64_t>& label_counts) {
  HuffmanTree tree;
  size_t n = label_counts.size();
  tree.nodes.resize(n);
  for (size_t i = 0; i < n; ++i) {
    tree.nodes[i].count = label_counts[i] > 0 ? label_counts[i] : 1;
  }
  if (n == 1) {
    tree.root = 0;
    return tree;
  }
  // Deterministic merge order: smallest (count, node index) first.
  std::set<std::pair<uint64_t, int>> active;
  for (size_t i = 0; i < n; ++i) active.emplace(tree.nodes[i].count, static_cast<int>(i));
  while (active.size() > 1) {
    auto [ca, ia] = *active.begin();
    active.erase(active.begin());
    auto [cb, ib] = *active.begin();
    active.erase(active.begin());
    HuffmanTree::Node parent;
    parent.count = ca + cb;
    parent.left = ia;
    parent.right = ib;
    tree.nodes.push_back(parent);
    active.emplace(parent.count, static_cast<int>(tree.nodes.size() - 1));
  }
  tree.root = static_cast<int>(tree.nodes.size() - 1);
  return tree;
}

std::vector<double> tree_log_probabilities(const std::vector<double>& logits,
                                           const std::vector<uint64_t>& label_counts) {
  HuffmanTree tree = build_huffman(label_counts);
  size_t n = logits.size();
  std::vector<double> score(tree.nodes.size(), 0.0);
  for (size_t i = 0; i < n; ++i) score[i] = logits[i];
  for (size_t i = n; i < tree.nodes.size(); ++i) {
    score[i] = log_sum_exp(score[tree.nodes[i].left], score[tree.nodes[i].right]);
  }
  std::vector<double> logp(n, 0.0);
  if (tree.root < static_cast<int>(n)) return logp;  // single label: probability 1
  // Walk down accumulating log branch probabilities.
  std::vector<std::pair<int, double>> stack{{tree.root, 0.0}};
  while (!stack.empty()) {
    auto [node, acc] = stack.back();
    stack.pop_back();
    if (node < static_cast<int>(n)) {
      logp[node] = acc;
      continue;
    }
    const auto& nd = tree.nodes[node];
    double denom = log_sum_exp(score[nd.left], score[nd.right]);
    stack.emplace_back(nd.left, acc + score[nd.left] - denom);
    stack.emplace_back(nd.right, acc + score[nd.right] - denom);
  }
  return logp;
}

}  // namespace

std::vector<double> log_probabilities(const FeatureBag& bag, const Model& model) {
  std::vector<double> hidden = hidden_vector(bag, model);
  std::vector<double> logits = logits_of(hidden, model);
  if (model.config.loss_mode == LossMode::HierarchicalSoftmax) {
    std::vector<uint64_t> counts = model.label_counts;
    counts.resize(model.labels.size(), 1);
    return tree_log_probabilities(logits, counts);
  }
  double denom = log_sum_exp(logits);
  for (double& v : logits) v -= denom;
  return logits;
}

Prediction forward(const FeatureBag& bag, const Model& model) {
  std::vector<double> logp = log_probabilities(bag, model);
  Prediction pred;
  pred.scores.resize(logp.size());
  for (size_t i = 0; i < logp.size(); ++i) pred.scores[i] = std::exp(logp[i]);
  pred.argmax_index = 0;
  for (size_t i = 1; i < pred.scores.size(); ++i) {
    if (pred.scores[i] > pred.scores[pred.argmax_index]) pred.argmax_index = i;
  }
  pred.argmax_label = model.labels.empty() ? "" : model.labels[pred.argmax_index];
  return pred;
}

double loss(const std::vector<LabeledBag>& dataset, const Model& model) {
  if (dataset.empty()) return 0.0;
  double total = 0.0;
  for (const auto& [bag, label_id] : dataset) {
    total -= log_probabilities(bag, model)[label_id];
  }
  return total / static_cast<double>(dataset.size());
}

LossGradients loss_gradients(const std::vector<LabeledBag>& dataset, const Model& model) {
  const uint64_t dim = model.input_weights.cols();
  const uint64_t num_labels = model.output_weights.cols();
  LossGradients grads;
  grads.d_input.assign(model.input_weights.rows(), std::vector<double>(dim, 0.0));
  grads.d_output.assign(dim, std::vector<double>(num_labels, 0.0));
  if (dataset.empty()) return grads;
  const double inv_n = 1.0 / static_cast<double>(dataset.size());
  for (const auto& [bag, label_id] : dataset) {
    std::vector<double> hidden = hidden_vector(bag, model);
    std::vector<double> logp = log_probabilities(bag, model);
    std::vector<double> g(num_labels);
    for (uint64_t l = 0; l < num_labels; ++l) {
      g[l] = (std::exp(logp[l]) - (l == label_id ? 1.0 : 0.0)) * inv_n;
    }
    for (uint64_t d = 0; d < dim; ++d) {
      for (uint64_t l = 0; l < num_labels; ++l) {
        grads.d_output[d][l] += hidden[d] * g[l];
      }
    }
    uint64_t total = bag.total_feature_count();
    if (total == 0) continue;
    std::vector<double> grad_hidden(dim, 0.0);
    for (uint64_t d = 0; d < dim; ++d) {
      const float* row = model.output_weights.row(d);
      for (uint64_t l = 0; l < num_labels; ++l) {
        grad_hidden[d] += g[l] * row[l];
      }
    }
    for (const auto& entry : bag.entries) {
      double scale = static_cast<double>(entry.count) / static_cast<double>(total);
      for (uint64_t d = 0; d < dim; ++d) {
        grads.d_input[entry.id][d] += grad_hidden[d] * scale;
      }
    }
  }
  return grads;
}

FeatureBag featurize_for_config(const TokenSequence& tokens, const Vocabulary& vocab,
                                const TrainConfig& config) {
  FeatureBag bag = featurize(tokens, vocab, config.feature_options());
  if (config.word_ngrams > 1 && config.hashing_buckets > 0) {
    std::map<uint64_t, uint32_t> counts;
    for (const auto& entry : bag.entries) counts.emplace(entry.id, entry.count);
    std::vector<uint64_t> hashes;
    hashes.reserve(tokens.size());
    for (const auto& token : tokens) hashes.push_back(fnv1a64(token));
    for (size_t i = 0; i < hashes.size(); ++i) {
      uint64_t h = hashes[i];
      for (size_t j = i + 1; j < hashes.size() && j < i + config.word_ngrams; ++j) {
        h = h * 116049371ULL + hashes[j];
        ++counts[vocab.size() + h % config.hashing_buckets];
      }
    }
    bag.entries.clear();
    for (const auto& [id, count] : counts) bag.entries.push_back({id, count});
  }
  return bag;
}

namespace {

void sgd_step(Model& model, const FeatureBag& bag, uint32_t label_id, double lr) {
  uint64_t total = bag.total_feature_count();
  if (total == 0) return;
  const uint64_t dim = model.input_weights.cols();
  const uint64_t num_labels = model.output_weights.cols();
  std::vector<double> hidden = hidden_vector(bag, model);
  std::vector<double> logp = log_probabilities(bag, model);
  std::vector<double> alpha(num_labels);
  for (uint64_t l = 0; l < num_labels; ++l) {
    alpha[l] = lr * ((l == label_id ? 1.0 : 0.0) - std::exp(logp[l]));
  }
  std::vector<double> grad_hidden(dim, 0.0);
  for (uint64_t d = 0; d < dim; ++d) {
    float* row = model.output_weights.row(d);
    for (uint64_t l = 0; l < num_labels; ++l) {
      grad_hidden[d] += alpha[l] * row[l];
      row[l] += static_cast<float>(alpha[l] * hidden[d]);
    }
  }
  for (const auto& entry : bag.entries) {
    double scale = static_cast<double>(entry.count) / static_cast<double>(total);
    float* row = model.input_weights.row(entry.id);
    for (uint64_t d = 0; d < dim; ++d) {
      row[d] += static_cast<float>(grad_hidden[d] * scale);
    }
  }
}

}  // namespace

Model train(const std::vector<LabeledTokens>& corpus, const TrainConfig& config,
            const std::vector<std::string>& label_set) {
  if (corpus.empty()) {
    throw std::invalid_argument("train: corpus is empty");
  }
  if (config.dim < 1 || config.epochs < 1 || config.learning_rate <= 0) {
    throw std::invalid_argument("train: dim and epochs must be >= 1, learning_rate > 0");
  }

  std::vector<std::string> labels = label_set;
  if (labels.empty()) {
    std::set<std::string> distinct;
    for (const auto& [tokens, label] : corpus) distinct.insert(label);
    labels.assign(distinct.begin(), distinct.end());
  } else {
    std::set<std::string> unique(labels.begin(), labels.end());
    if (unique.size() != labels.size()) {
      throw std::invalid_argument("train: label set contains duplicates");
    }
  }
  std::unordered_map<std::string, uint32_t> label_to_id;
  for (uint32_t i = 0; i < labels.size(); ++i) label_to_id.emplace(labels[i], i);

  std::vector<uint32_t> example_labels;
  example_labels.reserve(corpus.size());
  std::vector<uint64_t> label_counts(labels.size(), 0);
  for (const auto& [tokens, label] : corpus) {
    auto it = label_to_id.find(label);
    if (it == label_to_id.end()) {
      throw std::invalid_argument("train: unknown label \"" + label + "\"");
    }
    example_labels.push_back(it->second);
    ++label_counts[it->second];
  }

  std::vector<TokenSequence> token_corpus;
  token_corpus.reserve(corpus.size());
  for (const auto& [tokens, label] : corpus) token_corpus.push_back(tokens);

  Model model;
  model.config = config;
  model.labels = std::move(labels);
  model.label_counts = std::move(label_counts);
  model.vocab = build_vocabulary(token_corpus, config.min_count);

  std::vector<FeatureBag> bags;
  bags.reserve(corpus.size());
  for (const auto& tokens : token_corpus) {
    bags.push_back(featurize_for_config(tokens, model.vocab, config));
  }

  const uint64_t rows = model.vocab.size() + config.effective_buckets();
  model.input_weights = Matrix(rows, config.dim);
  model.output_weights = Matrix(config.dim, model.labels.size());

  Rng rng(config.seed);
  const double inv_dim = 1.0 / static_cast<double>(config.dim);
  for (float& v : model.input_weights.data()) {
    v = static_cast<float>((rng.next_double() * 2.0 - 1.0) * inv_dim);
  }

  std::vector<size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  const uint64_t total_updates = static_cast<uint64_t>(config.epochs) * corpus.size();
  uint64_t processed = 0;
  for (uint32_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    for (size_t idx : order) {
      double progress = static_cast<double>(processed) / static_cast<double>(total_updates);
      double lr = config.learning_rate * (1.0 - progress);
      sgd_step(model, bags[idx], example_labels[idx], lr);
      ++processed;
    }
  }
  return model;
}

Prediction predict_text(const std::string& text, const Model& model) {
  FeatureBag bag = featurize_for_config(tokenize(text), model.vocab, model.config);
  return forward(bag, model);
}

namespace {

constexpr char kMagic[4] = {'I', 'T', 'G', 'M'};
constexpr uint32_t kFormatVersion = 1;

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void bytes(const void* data, size_t len) {
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(len));
  }
  void u8(uint8_t v) { bytes(&v, 1); }
  void u32(uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    bytes(b, 4);
  }
  void u64(uint64_t v) {
    u32(static_cast<uint32_t>(v));
    u32(static_cast<uint32_t>(v >> 32));
  }
  void f32(float v) { u32(std::bit_cast<uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<uint64_t>(v)); }
  void str(const std::string& s) {
    u32(static_cast<uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  void bytes(void* data, size_t len) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(len));
    if (static_cast<size_t>(in_.gcount()) != len) {
      throw ModelFormatError(ModelFormatError::Kind::Truncated,
                             "model file: truncated payload");
    }
  }
  uint8_t u8() {
    uint8_t v;
    bytes(&v, 1);
    return v;
  }
  uint32_t u32() {
    unsigned char b[4];
    bytes(b, 4);
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
  }
  uint64_t u64() {
    uint64_t lo = u32();
    uint64_t hi = u32();
    return lo | (hi << 32);
  }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    uint32_t len = u32();
    std::string s(len, '\0');
    if (len > 0) bytes(s.data(), len);
    return s;
  }
  bool at_end() {
    in_.peek();
    return in_.eof();
  }

 private:
  std::istream& in_;
};

void write_matrix(Writer& w, const Matrix& m) {
  w.u64(m.rows());
  w.u32(static_cast<uint32_t>(m.cols()));
  for (float v : m.data()) w.f32(v);
}

Matrix read_matrix(Reader& r) {
  uint64_t rows = r.u64();
  uint32_t cols = r.u32();
  Matrix m(rows, cols);
  for (float& v : m.data()) v = r.f32();
  return m;
}

}  // namespace

void save(const Model& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("save: cannot open \"" + path + "\" for writing");
  }
  Writer w(out);
  w.bytes(kMagic, 4);
  w.u32(kFormatVersion);
  const TrainConfig& c = model.config;
  w.u32(c.dim);
  w.u32(c.epochs);
  w.f64(c.learning_rate);
  w.u32(c.min_count);
  w.u32(c.word_ngrams);
  w.u32(c.char_ngram_min);
  w.u32(c.char_ngram_max);
  w.u64(c.hashing_buckets);
  w.u8(static_cast<uint8_t>(c.loss_mode));
  w.u64(c.seed);
  w.u32(static_cast<uint32_t>(model.labels.size()));
  for (size_t i = 0; i < model.labels.size(); ++i) {
    w.str(model.labels[i]);
    w.u64(i < model.label_counts.size() ? model.label_counts[i] : 0);
  }
  w.u64(model.vocab.size());
  for (uint32_t id = 0; id < model.vocab.size(); ++id) {
    w.str(model.vocab.word(id));
    w.u64(model.vocab.count(id));
  }
  write_matrix(w, model.input_weights);
  write_matrix(w, model.output_weights);
  out.flush();
  if (!out) {
    throw std::runtime_error("save: write failed for \"" + path + "\"");
  }
}

Model load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("load: cannot open \"" + path + "\"");
  }
  Reader r(in);
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw ModelFormatError(ModelFormatError::Kind::BadMagic, "model file: bad magic");
  }
  uint32_t version = r.u32();
  if (version != kFormatVersion) {
    throw ModelFormatError(ModelFormatError::Kind::UnknownVersion,
                           "model file: unknown format version " + std::to_string(version));
  }
  Model model;
  TrainConfig& c = model.config;
  c.dim = r.u32();
  c.epochs = r.u32();
  c.learning_rate = r.f64();
  c.min_count = r.u32();
  c.word_ngrams = r.u32();
  c.char_ngram_min = r.u32();
  c.char_ngram_max = r.u32();
  c.hashing_buckets = r.u64();
  c.loss_mode = static_cast<LossMode>(r.u8());
  c.seed = r.u64();
  uint32_t num_labels = r.u32();
  model.labels.resize(num_labels);
  model.label_counts.resize(num_labels);
  for (uint32_t i = 0; i < num_labels; ++i) {
    model.labels[i] = r.str();
    model.label_counts[i] = r.u64();
  }
  uint64_t vocab_size = r.u64();
  std::vector<std::string> words(vocab_size);
  std::vector<uint64_t> counts(vocab_size);
  for (uint64_t i = 0; i < vocab_size; ++i) {
    words[i] = r.str();
    counts[i] = r.u64();
  }
  model.vocab = Vocabulary(std::move(words), std::move(counts), c.min_count);
  model.input_weights = read_matrix(r);
  model.output_weights = read_matrix(r);
  if (model.input_weights.cols() != c.dim || model.output_weights.rows() != c.dim ||
      model.output_weights.cols() != num_labels ||
      model.input_weights.rows() != model.vocab.size() + c.effective_buckets()) {
    throw ModelFormatError(ModelFormatError::Kind::Truncated,
                           "model file: inconsistent dimensions");
  }
  if (!r.at_end()) {
    throw ModelFormatError(ModelFormatError::Kind::Truncated,
                           "model file: unexpected trailing bytes");
  }
  return model;
}

}  // namespace issuetag
