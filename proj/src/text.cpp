#include "issuetag/text.hpp"

#include <map>

#include "issuetag/classifier.hpp"
#include "issuetag/rng.hpp"
#include "issuetag/unicode.hpp"

namespace issuetag {

std::string concatenate(const RawIssue& issue) {
  if (issue.title.empty()) return issue.body;
  if (issue.body.empty()) return issue.title;
  return issue.title + " " + issue.body;
}

TokenSequence tokenize(const std::string& text) {
  std::u32string cps = uni::compose_common(uni::decode_utf8(text));
  TokenSequence tokens;
  std::u32string current;
  auto flush = [&] {
    if (!current.empty()) {
      tokens.push_back(uni::encode_utf8(current));
      current.clear();
    }
  };
  for (char32_t cp : cps) {
    if (uni::is_word_char(cp)) {
      current.push_back(uni::fold_case(cp));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

std::vector<std::string> char_ngrams(const std::string& token, uint32_t min_n, uint32_t max_n) {
  std::u32string wrapped;
  wrapped.push_back(U'<');
  wrapped += uni::decode_utf8(token);
  wrapped.push_back(U'>');

  std::vector<std::string> out;
  size_t len = wrapped.size();
  for (uint32_t n = min_n; n <= max_n && n >= 1; ++n) {
    if (n > len) break;
    for (size_t start = 0; start + n <= len; ++start) {
      if (n == len) continue;  // the whole token is emitted once, below
      out.push_back(uni::encode_utf8(wrapped.substr(start, n)));
    }
  }
  out.push_back(uni::encode_utf8(wrapped));
  return out;
}

FeatureBag featurize(const TokenSequence& tokens, const Vocabulary& vocab,
                     const FeatureOptions& opts) {
  std::map<uint64_t, uint32_t> counts;
  for (const auto& token : tokens) {
    if (auto id = vocab.id_of(token)) {
      ++counts[*id];
    }
    if (opts.ngrams_enabled() && opts.hashing_buckets > 0) {
      for (const auto& gram : char_ngrams(token, opts.char_ngram_min, opts.char_ngram_max)) {
        uint64_t bucket = vocab.size() + fnv1a64(gram) % opts.hashing_buckets;
        ++counts[bucket];
      }
    }
  }
  FeatureBag bag;
  bag.token_count = tokens.size();
  bag.entries.reserve(counts.size());
  for (const auto& [id, count] : counts) bag.entries.push_back({id, count});
  return bag;
}

}  // namespace issuetag
