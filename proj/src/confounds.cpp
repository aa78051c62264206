#include "issuetag/confounds.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "issuetag/rng.hpp"
#include "issuetag/text.hpp"

namespace issuetag {

namespace {

// Folded letter sequences split into words; digits and punctuation separate.
std::vector<std::u32string> letter_words(const std::string& text) {
  std::u32string cps = uni::compose_common(uni::decode_utf8(text));
  std::vector<std::u32string> words;
  std::u32string current;
  for (char32_t cp : cps) {
    if (uni::is_letter(cp)) {
      current.push_back(uni::fold_case(cp));
    } else if (!current.empty()) {
      words.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

std::map<std::string, uint64_t> trigram_counts(const std::vector<std::u32string>& words) {
  std::map<std::string, uint64_t> counts;
  for (const auto& word : words) {
    std::u32string padded;
    padded.push_back(U' ');
    padded += word;
    padded.push_back(U' ');
    if (padded.size() < 3) continue;
    for (size_t i = 0; i + 3 <= padded.size(); ++i) {
      ++counts[uni::encode_utf8(padded.substr(i, 3))];
    }
  }
  return counts;
}

std::vector<std::string> ranked_trigrams(const std::map<std::string, uint64_t>& counts,
                                         size_t cap) {
  std::vector<std::pair<std::string, uint64_t>> items(counts.begin(), counts.end());
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (items.size() > cap) items.resize(cap);
  std::vector<std::string> out;
  out.reserve(items.size());
  for (auto& [trigram, count] : items) out.push_back(std::move(trigram));
  return out;
}

uni::Script dominant_script_of(const std::vector<std::u32string>& words) {
  std::map<uni::Script, size_t> histogram;
  for (const auto& word : words) {
    for (char32_t cp : word) ++histogram[uni::script_of(cp)];
  }
  uni::Script best = uni::Script::Other;
  size_t best_count = 0;
  for (auto [script, count] : histogram) {
    if (count > best_count) {
      best = script;
      best_count = count;
    }
  }
  return best;
}

void index_ranks(LanguageProfile& profile) {
  profile.rank_of.clear();
  for (size_t i = 0; i < profile.trigrams.size(); ++i) {
    profile.rank_of.emplace(profile.trigrams[i], static_cast<int>(i));
  }
  std::vector<std::u32string> letters;
  for (const auto& trigram : profile.trigrams) {
    letters.push_back(uni::decode_utf8(trigram));
  }
  profile.dominant_script = dominant_script_of(letters);
}

}  // namespace

LanguageProfile build_profile(const std::string& language_tag, const std::string& corpus_text,
                              const std::string& source_note, size_t cap) {
  LanguageProfile profile;
  profile.language_tag = language_tag;
  profile.source_note = source_note;
  profile.trigrams = ranked_trigrams(trigram_counts(letter_words(corpus_text)), cap);
  index_ranks(profile);
  return profile;
}

void save_profile(const LanguageProfile& profile, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open \"" + path + "\" for writing");
  }
  out << "# language: " << profile.language_tag << '\n';
  out << "# source: " << profile.source_note << '\n';
  for (size_t i = 0; i < profile.trigrams.size(); ++i) {
    out << profile.trigrams[i] << '\t' << i << '\n';
  }
  if (!out.flush()) {
    throw std::runtime_error("write failed for \"" + path + "\"");
  }
}

LanguageProfile load_profile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open \"" + path + "\"");
  }
  LanguageProfile profile;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind("# language: ", 0) == 0) {
      profile.language_tag = line.substr(12);
      continue;
    }
    if (line.rfind("# source: ", 0) == 0) {
      profile.source_note = line.substr(10);
      continue;
    }
    size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw std::runtime_error("profile \"" + path + "\": missing tab in line \"" + line + "\"");
    }
    profile.trigrams.push_back(line.substr(0, tab));
  }
  if (profile.language_tag.empty()) {
    throw std::runtime_error("profile \"" + path + "\": missing language header");
  }
  index_ranks(profile);
  return profile;
}

std::vector<LanguageProfile> load_profiles(const std::string& directory) {
  std::vector<std::string> paths;
  for (const auto& entry : std::filesystem::directory_iterator(directory)) {
    if (entry.path().extension() == ".profile") paths.push_back(entry.path().string());
  }
  std::sort(paths.begin(), paths.end());
  std::vector<LanguageProfile> profiles;
  profiles.reserve(paths.size());
  for (const auto& path : paths) profiles.push_back(load_profile(path));
  return profiles;
}

std::pair<std::string, double> detect_language(const std::string& text,
                                               const std::vector<LanguageProfile>& profiles) {
  std::vector<std::u32string> words = letter_words(text);
  size_t letters = 0;
  for (const auto& word : words) letters += word.size();
  if (letters < kDetectorMinLetters || profiles.empty()) {
    return {"und", 0.0};
  }
  uni::Script script = dominant_script_of(words);

  std::vector<const LanguageProfile*> candidates;
  for (const auto& profile : profiles) {
    if (profile.dominant_script == script) candidates.push_back(&profile);
  }
  if (candidates.empty()) {
    return {"und", 0.0};
  }

  std::vector<std::string> text_ranking = ranked_trigrams(trigram_counts(words), kProfileCap);

  // Cavnar–Trenkle out-of-place distance: sum of rank displacements, with the
  // profile size as the penalty for trigrams missing from the profile.
  auto distance_to = [&text_ranking](const LanguageProfile& profile) {
    const int penalty = static_cast<int>(profile.size() ? profile.size() : kProfileCap);
    int64_t distance = 0;
    for (size_t r = 0; r < text_ranking.size(); ++r) {
      auto it = profile.rank_of.find(text_ranking[r]);
      if (it == profile.rank_of.end()) {
        distance += penalty;
      } else {
        distance += std::abs(static_cast<int>(r) - it->second);
      }
    }
    return distance;
  };

  std::vector<std::pair<int64_t, std::string>> ranked;
  ranked.reserve(candidates.size());
  for (const auto* candidate : candidates) {
    ranked.emplace_back(distance_to(*candidate), candidate->language_tag);
  }
  std::sort(ranked.begin(), ranked.end());
  double confidence = 1.0;  // a single surviving candidate wins outright
  if (ranked.size() > 1) {
    int64_t best_distance = ranked[0].first;
    int64_t runner_up = ranked[1].first;
    confidence = runner_up > 0
                     ? static_cast<double>(runner_up - best_distance) / static_cast<double>(runner_up)
                     : 0.0;
  }
  return {ranked[0].second, confidence};
}

bool detect_code_snippet(const std::string& body) {
  bool open = false;
  size_t pos = 0;
  while (pos <= body.size()) {
    size_t end = body.find('\n', pos);
    std::string_view line(body.data() + pos,
                          (end == std::string::npos ? body.size() : end) - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.substr(0, 3) == "```") {
      if (open) return true;
      open = true;
    }
    if (end == std::string::npos) break;
    pos = end + 1;
  }
  return false;
}

TreatmentPair build_treatment(const Dataset& dataset, const TreatmentSpec& spec,
                              const std::vector<LanguageProfile>& profiles,
                              const std::string& language_tag) {
  if (spec.size == 0) {
    throw std::invalid_argument("build_treatment: size must be > 0");
  }
  auto passes = [&](const LabeledIssue& issue) {
    if (spec.kind == TreatmentKind::CodeSnippetPresence) {
      return detect_code_snippet(issue.body);
    }
    RawIssue raw{issue.title, issue.body};
    auto [tag, confidence] = detect_language(concatenate(raw), profiles);
    return tag == language_tag && confidence > 0.0;
  };

  std::vector<size_t> qualifying;
  std::vector<size_t> full_pool;
  for (size_t i = 0; i < dataset.issues.size(); ++i) {
    full_pool.push_back(i);
    if (passes(dataset.issues[i])) qualifying.push_back(i);
  }
  auto by_id = [&dataset](size_t a, size_t b) {
    return dataset.issues[a].id < dataset.issues[b].id;
  };
  std::sort(qualifying.begin(), qualifying.end(), by_id);
  std::sort(full_pool.begin(), full_pool.end(), by_id);

  if (qualifying.size() < spec.size) {
    throw ValidationError("treatment pool has " + std::to_string(qualifying.size()) +
                          " qualifying issues, need " + std::to_string(spec.size));
  }
  if (full_pool.size() < spec.size) {
    throw ValidationError("dataset has " + std::to_string(full_pool.size()) +
                          " issues, need " + std::to_string(spec.size));
  }

  const char* kind_name =
      spec.kind == TreatmentKind::CodeSnippetPresence ? "code_snippet_presence" : "consistent_language";
  TreatmentPair pair;
  pair.treatment.provenance = std::string("treatment(") + kind_name + ") from " + dataset.provenance;
  pair.baseline.provenance = std::string("baseline(") + kind_name + ") from " + dataset.provenance;

  Rng treatment_rng = Rng::derive(spec.seed, 1);
  for (size_t idx : treatment_rng.sample_indices(qualifying.size(), spec.size)) {
    pair.treatment.issues.push_back(dataset.issues[qualifying[idx]]);
  }
  Rng baseline_rng = Rng::derive(spec.seed, 2);
  for (size_t idx : baseline_rng.sample_indices(full_pool.size(), spec.size)) {
    pair.baseline.issues.push_back(dataset.issues[full_pool[idx]]);
  }
  return pair;
}

}  // namespace issuetag
