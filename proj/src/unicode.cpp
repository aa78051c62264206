#include "issuetag/unicode.hpp"

#include <array>
#include <unordered_map>

namespace issuetag::uni {

namespace {

constexpr char32_t kReplacement = 0xFFFD;

int sequence_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead & 0xE0) == 0xC0) return 2;
  if ((lead & 0xF0) == 0xE0) return 3;
  if ((lead & 0xF8) == 0xF0) return 4;
  return 0;
}

}  // namespace

std::u32string decode_utf8(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  size_t i = 0;
  while (i < text.size()) {
    unsigned char lead = static_cast<unsigned char>(text[i]);
    int len = sequence_length(lead);
    if (len == 0) {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    if (len == 1) {
      out.push_back(lead);
      ++i;
      continue;
    }
    if (i + len > text.size()) {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    char32_t cp = lead & (0x7F >> len);
    bool ok = true;
    for (int k = 1; k < len; ++k) {
      unsigned char cont = static_cast<unsigned char>(text[i + k]);
      if ((cont & 0xC0) != 0x80) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (cont & 0x3F);
    }
    if (!ok) {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    // Reject overlong encodings, surrogates and out-of-range values.
    static constexpr char32_t kMin[5] = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      out.push_back(kReplacement);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::string encode_utf8(char32_t cp) {
  std::string out;
  if (cp <= 0x7F) {
    out.push_back(static_cast<char>(cp));
  } else if (cp <= 0x7FF) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp <= 0xFFFF) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
  return out;
}

std::string encode_utf8(const std::u32string& cps) {
  std::string out;
  out.reserve(cps.size());
  for (char32_t cp : cps) out += encode_utf8(cp);
  return out;
}

char32_t fold_case(char32_t cp) {
  if (cp >= U'A' && cp <= U'Z') return cp + 0x20;
  // Latin-1 Supplement uppercase block, excluding the multiplication sign.
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
  // Latin Extended-A pairs alternate upper/lower; the parity flips at U+0139.
  if (cp == 0x0130) return U'i';  // I with dot above
  if (cp == 0x0131) return cp;    // dotless i is already lowercase
  if (cp >= 0x0100 && cp <= 0x0137) return (cp % 2 == 0) ? cp + 1 : cp;
  if (cp >= 0x0139 && cp <= 0x0148) return (cp % 2 == 1) ? cp + 1 : cp;
  if (cp >= 0x014A && cp <= 0x0177) return (cp % 2 == 0) ? cp + 1 : cp;
  if (cp == 0x0178) return 0x00FF;  // Y with diaeresis
  if (cp >= 0x0179 && cp <= 0x017E) return (cp % 2 == 1) ? cp + 1 : cp;
  if (cp >= 0x0391 && cp <= 0x03AB && cp != 0x03A2) return cp + 0x20;
  if (cp >= 0x0410 && cp <= 0x042F) return cp + 0x20;
  if (cp >= 0x0400 && cp <= 0x040F) return cp + 0x50;
  return cp;
}

bool is_letter(char32_t cp) {
  if ((cp >= U'a' && cp <= U'z') || (cp >= U'A' && cp <= U'Z')) return true;
  if (cp >= 0xC0 && cp <= 0x024F) return cp != 0xD7 && cp != 0xF7;
  if (cp >= 0x0386 && cp <= 0x03FF) return cp != 0x0387;  // Greek
  if (cp >= 0x0400 && cp <= 0x04FF) return true;          // Cyrillic
  if (cp >= 0x0531 && cp <= 0x0586) return true;          // Armenian
  if (cp >= 0x05D0 && cp <= 0x05EA) return true;          // Hebrew
  if (cp >= 0x0620 && cp <= 0x064A) return true;          // Arabic
  if (cp >= 0x0671 && cp <= 0x06D3) return true;
  if (cp >= 0x0905 && cp <= 0x0939) return true;          // Devanagari
  if (cp >= 0x3041 && cp <= 0x3096) return true;          // Hiragana
  if (cp >= 0x30A1 && cp <= 0x30FA) return true;          // Katakana
  if (cp >= 0x3400 && cp <= 0x4DBF) return true;          // CJK ext A
  if (cp >= 0x4E00 && cp <= 0x9FFF) return true;          // CJK unified
  if (cp >= 0xAC00 && cp <= 0xD7A3) return true;          // Hangul syllables
  if (cp >= 0xF900 && cp <= 0xFAD9) return true;          // CJK compat
  return false;
}

bool is_digit(char32_t cp) { return cp >= U'0' && cp <= U'9'; }

Script script_of(char32_t cp) {
  if ((cp >= U'a' && cp <= U'z') || (cp >= U'A' && cp <= U'Z')) return Script::Latin;
  if (cp >= 0xC0 && cp <= 0x024F) return Script::Latin;
  if (cp >= 0x0386 && cp <= 0x03FF) return Script::Greek;
  if (cp >= 0x0400 && cp <= 0x04FF) return Script::Cyrillic;
  if (cp >= 0x05D0 && cp <= 0x05EA) return Script::Hebrew;
  if ((cp >= 0x0620 && cp <= 0x064A) || (cp >= 0x0671 && cp <= 0x06D3)) return Script::Arabic;
  if (cp >= 0x0905 && cp <= 0x0939) return Script::Devanagari;
  if ((cp >= 0x3041 && cp <= 0x3096) || (cp >= 0x30A1 && cp <= 0x30FA)) return Script::Kana;
  if ((cp >= 0x3400 && cp <= 0x4DBF) || (cp >= 0x4E00 && cp <= 0x9FFF) ||
      (cp >= 0xF900 && cp <= 0xFAD9)) {
    return Script::Han;
  }
  if (cp >= 0xAC00 && cp <= 0xD7A3) return Script::Hangul;
  return Script::Other;
}

namespace {

// (base << 21 | combining mark) -> precomposed code point.
uint64_t pair_key(char32_t base, char32_t mark) {
  return (static_cast<uint64_t>(base) << 21) | mark;
}

const std::unordered_map<uint64_t, char32_t>& composition_table() {
  static const std::unordered_map<uint64_t, char32_t> table = [] {
    std::unordered_map<uint64_t, char32_t> t;
    auto add = [&t](char32_t base, char32_t mark, char32_t composed) {
      t.emplace(pair_key(base, mark), composed);
    };
    // U+0300 combining grave
    add(U'A', 0x300, 0xC0); add(U'E', 0x300, 0xC8); add(U'I', 0x300, 0xCC);
    add(U'O', 0x300, 0xD2); add(U'U', 0x300, 0xD9);
    add(U'a', 0x300, 0xE0); add(U'e', 0x300, 0xE8); add(U'i', 0x300, 0xEC);
    add(U'o', 0x300, 0xF2); add(U'u', 0x300, 0xF9);
    // U+0301 combining acute
    add(U'A', 0x301, 0xC1); add(U'E', 0x301, 0xC9); add(U'I', 0x301, 0xCD);
    add(U'O', 0x301, 0xD3); add(U'U', 0x301, 0xDA); add(U'Y', 0x301, 0xDD);
    add(U'a', 0x301, 0xE1); add(U'e', 0x301, 0xE9); add(U'i', 0x301, 0xED);
    add(U'o', 0x301, 0xF3); add(U'u', 0x301, 0xFA); add(U'y', 0x301, 0xFD);
    add(U'C', 0x301, 0x106); add(U'c', 0x301, 0x107);
    add(U'L', 0x301, 0x139); add(U'l', 0x301, 0x13A);
    add(U'N', 0x301, 0x143); add(U'n', 0x301, 0x144);
    add(U'R', 0x301, 0x154); add(U'r', 0x301, 0x155);
    add(U'S', 0x301, 0x15A); add(U's', 0x301, 0x15B);
    add(U'Z', 0x301, 0x179); add(U'z', 0x301, 0x17A);
    // U+0302 combining circumflex
    add(U'A', 0x302, 0xC2); add(U'E', 0x302, 0xCA); add(U'I', 0x302, 0xCE);
    add(U'O', 0x302, 0xD4); add(U'U', 0x302, 0xDB);
    add(U'a', 0x302, 0xE2); add(U'e', 0x302, 0xEA); add(U'i', 0x302, 0xEE);
    add(U'o', 0x302, 0xF4); add(U'u', 0x302, 0xFB);
    // U+0303 combining tilde
    add(U'A', 0x303, 0xC3); add(U'N', 0x303, 0xD1); add(U'O', 0x303, 0xD5);
    add(U'a', 0x303, 0xE3); add(U'n', 0x303, 0xF1); add(U'o', 0x303, 0xF5);
    // U+0304 combining macron
    add(U'A', 0x304, 0x100); add(U'a', 0x304, 0x101);
    add(U'E', 0x304, 0x112); add(U'e', 0x304, 0x113);
    add(U'I', 0x304, 0x12A); add(U'i', 0x304, 0x12B);
    add(U'O', 0x304, 0x14C); add(U'o', 0x304, 0x14D);
    add(U'U', 0x304, 0x16A); add(U'u', 0x304, 0x16B);
    // U+0306 combining breve
    add(U'A', 0x306, 0x102); add(U'a', 0x306, 0x103);
    add(U'G', 0x306, 0x11E); add(U'g', 0x306, 0x11F);
    add(0x0418, 0x306, 0x0419); add(0x0438, 0x306, 0x0439);
    add(0x0423, 0x306, 0x040E); add(0x0443, 0x306, 0x045E);
    // U+0307 combining dot above
    add(U'Z', 0x307, 0x17B); add(U'z', 0x307, 0x17C);
    add(U'I', 0x307, 0x130);
    // U+0308 combining diaeresis
    add(U'A', 0x308, 0xC4); add(U'E', 0x308, 0xCB); add(U'I', 0x308, 0xCF);
    add(U'O', 0x308, 0xD6); add(U'U', 0x308, 0xDC);
    add(U'a', 0x308, 0xE4); add(U'e', 0x308, 0xEB); add(U'i', 0x308, 0xEF);
    add(U'o', 0x308, 0xF6); add(U'u', 0x308, 0xFC); add(U'y', 0x308, 0xFF);
    add(0x0415, 0x308, 0x0401); add(0x0435, 0x308, 0x0451);
    // U+030A combining ring above
    add(U'A', 0x30A, 0xC5); add(U'a', 0x30A, 0xE5);
    add(U'U', 0x30A, 0x16E); add(U'u', 0x30A, 0x16F);
    // U+030C combining caron
    add(U'C', 0x30C, 0x10C); add(U'c', 0x30C, 0x10D);
    add(U'D', 0x30C, 0x10E); add(U'd', 0x30C, 0x10F);
    add(U'E', 0x30C, 0x11A); add(U'e', 0x30C, 0x11B);
    add(U'L', 0x30C, 0x13D); add(U'l', 0x30C, 0x13E);
    add(U'N', 0x30C, 0x147); add(U'n', 0x30C, 0x148);
    add(U'R', 0x30C, 0x158); add(U'r', 0x30C, 0x159);
    add(U'S', 0x30C, 0x160); add(U's', 0x30C, 0x161);
    add(U'T', 0x30C, 0x164); add(U't', 0x30C, 0x165);
    add(U'Z', 0x30C, 0x17D); add(U'z', 0x30C, 0x17E);
    // U+0327 combining cedilla
    add(U'C', 0x327, 0xC7); add(U'c', 0x327, 0xE7);
    add(U'G', 0x327, 0x122); add(U'g', 0x327, 0x123);
    add(U'K', 0x327, 0x136); add(U'k', 0x327, 0x137);
    add(U'L', 0x327, 0x13B); add(U'l', 0x327, 0x13C);
    add(U'N', 0x327, 0x145); add(U'n', 0x327, 0x146);
    add(U'R', 0x327, 0x156); add(U'r', 0x327, 0x157);
    add(U'S', 0x327, 0x15E); add(U's', 0x327, 0x15F);
    add(U'T', 0x327, 0x162); add(U't', 0x327, 0x163);
    // U+0328 combining ogonek
    add(U'A', 0x328, 0x104); add(U'a', 0x328, 0x105);
    add(U'E', 0x328, 0x118); add(U'e', 0x328, 0x119);
    return t;
  }();
  return table;
}

}  // namespace

std::u32string compose_common(const std::u32string& cps) {
  std::u32string out;
  out.reserve(cps.size());
  for (char32_t cp : cps) {
    if (!out.empty()) {
      auto it = composition_table().find(pair_key(out.back(), cp));
      if (it != composition_table().end()) {
        out.back() = it->second;
        continue;
      }
    }
    out.push_back(cp);
  }
  return out;
}

}  // namespace issuetag::uni
