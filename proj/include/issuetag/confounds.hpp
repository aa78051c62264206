#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "issuetag/dataset.hpp"
#include "issuetag/unicode.hpp"

namespace issuetag {

// Character-trigram frequency profile of one language, capped at the top 300
// trigrams. Trigrams run over space-padded words of the folded, letters-only
// text, so word-boundary trigrams are included.
struct LanguageProfile {
  std::string language_tag;
  std::string source_note;
  std::vector<std::string> trigrams;  // rank = position, most frequent first
  std::unordered_map<std::string, int> rank_of;
  uni::Script dominant_script = uni::Script::Other;

  size_t size() const { return trigrams.size(); }
};

inline constexpr size_t kProfileCap = 300;
inline constexpr size_t kDetectorMinLetters = 10;

LanguageProfile build_profile(const std::string& language_tag, const std::string& corpus_text,
                              const std::string& source_note, size_t cap = kProfileCap);

// One trigram + rank per line, UTF-8, headed by language tag and source.
void save_profile(const LanguageProfile& profile, const std::string& path);
LanguageProfile load_profile(const std::string& path);
std::vector<LanguageProfile> load_profiles(const std::string& directory);

// Script-set filtering first, then the minimal out-of-place trigram-rank
// distance. Confidence is the normalized margin over the runner-up; texts
// below the letter floor return ("und", 0).
std::pair<std::string, double> detect_language(const std::string& text,
                                               const std::vector<LanguageProfile>& profiles);

// True iff the body contains a fenced block: a line beginning with ``` and a
// later line beginning with ```. Inline backticks, indented blocks and
// unclosed fences do not count.
bool detect_code_snippet(const std::string& body);

enum class TreatmentKind { ConsistentLanguage, CodeSnippetPresence };

struct TreatmentSpec {
  TreatmentKind kind = TreatmentKind::ConsistentLanguage;
  size_t size = 0;
  uint64_t seed = 0;
};

struct TreatmentPair {
  Dataset treatment;  // every issue satisfies the predicate
  Dataset baseline;   // uniform sample from the full pool
};

// The consistent-language predicate accepts issues whose detected top-1
// language equals `language_tag` with confidence > 0.
TreatmentPair build_treatment(const Dataset& dataset, const TreatmentSpec& spec,
                              const std::vector<LanguageProfile>& profiles = {},
                              const std::string& language_tag = "eng");

}  // namespace issuetag
