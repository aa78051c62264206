#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace issuetag::uni {

// Script buckets used by the language detector's character-set filter.
enum class Script {
  Latin,
  Cyrillic,
  Greek,
  Arabic,
  Hebrew,
  Devanagari,
  Han,
  Kana,
  Hangul,
  Other,
};

// Decodes UTF-8 into code points. Invalid sequences (truncated, overlong,
// surrogates, out-of-range) decode to U+FFFD, one replacement per bad byte
// run, so the mapping is total and deterministic.
std::u32string decode_utf8(std::string_view text);

std::string encode_utf8(char32_t cp);
std::string encode_utf8(const std::u32string& cps);

// Simple case folding covering ASCII, Latin-1, Latin Extended-A, Greek and
// Cyrillic. Everything else maps to itself.
char32_t fold_case(char32_t cp);

bool is_letter(char32_t cp);
bool is_digit(char32_t cp);
inline bool is_word_char(char32_t cp) { return is_letter(cp) || is_digit(cp); }

Script script_of(char32_t cp);

// Canonical composition for the common Latin and Cyrillic base+combining-mark
// pairs (grave, acute, circumflex, tilde, macron, breve, dot above, diaeresis,
// ring, caron, cedilla, ogonek). Not full NFC: sequences outside the bundled
// table are left as-is, which the tokenizer then treats as separators.
std::u32string compose_common(const std::u32string& cps);

}  // namespace issuetag::uni
