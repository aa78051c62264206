#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace issuetag {

class Vocabulary;

struct RawIssue {
  std::string title;
  std::string body;  // may be empty
};

using TokenSequence = std::vector<std::string>;

// Sparse multiset of feature ids for one document. Word ids occupy
// [0, vocab_size), character n-gram buckets occupy
// [vocab_size, vocab_size + hashing_buckets).
struct FeatureBag {
  struct Entry {
    uint64_t id;
    uint32_t count;
    bool operator==(const Entry&) const = default;
  };

  std::vector<Entry> entries;  // sorted by id, unique
  uint64_t token_count = 0;    // number of input word tokens

  uint64_t total_feature_count() const {
    uint64_t total = 0;
    for (const auto& e : entries) total += e.count;
    return total;
  }

  uint32_t count_of(uint64_t id) const {
    for (const auto& e : entries) {
      if (e.id == id) return e.count;
    }
    return 0;
  }

  bool operator==(const FeatureBag&) const = default;
};

struct FeatureOptions {
  // Character n-gram range, boundary-marked. min_n = 0 disables n-grams.
  uint32_t char_ngram_min = 3;
  uint32_t char_ngram_max = 6;
  uint64_t hashing_buckets = 2'000'000;

  bool ngrams_enabled() const { return char_ngram_min >= 1 && char_ngram_max >= char_ngram_min; }
};

// Title, one space, body; an empty side yields the other alone.
std::string concatenate(const RawIssue& issue);

// Lowercases, composes common combining sequences, replaces every
// non-alphanumeric code point with a space and splits. Deterministic; the
// exact rule is frozen by the golden corpus in tests/fixtures.
TokenSequence tokenize(const std::string& text);

// All substrings of "<token>" with length in [min_n, max_n] except the whole
// wrapped token, grouped by length then position, followed by the wrapped
// whole token as a distinct final feature. Lengths count code points.
std::vector<std::string> char_ngrams(const std::string& token, uint32_t min_n = 3,
                                     uint32_t max_n = 6);

// Maps tokens to a FeatureBag: in-vocabulary tokens contribute their word id,
// every token's character n-grams contribute FNV-1a hash buckets offset past
// the word-id range. Unknown words contribute only their n-gram buckets.
FeatureBag featurize(const TokenSequence& tokens, const Vocabulary& vocab,
                     const FeatureOptions& opts);

}  // namespace issuetag
