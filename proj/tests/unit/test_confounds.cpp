#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "issuetag/confounds.hpp"
#include "issuetag/rng.hpp"
#include "synthetic.hpp"

using namespace issuetag;

namespace {

std::string fixture_path(const std::string& name) {
  return std::string(ISSUETAG_SOURCE_DIR) + "/tests/fixtures/" + name;
}

std::string profiles_dir() { return std::string(ISSUETAG_SOURCE_DIR) + "/data/profiles"; }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("detect_code_snippet follows the line-anchored fence rule") {
  CHECK(detect_code_snippet("see\n```\nx=1\n```\nabove"));
  CHECK(!detect_code_snippet("use the `foo` flag"));
  CHECK(!detect_code_snippet("opening ``` only, never closed"));
}

TEST_CASE("detect_code_snippet agrees with the crafted markdown corpus") {
  auto cases = nlohmann::json::parse(read_file(fixture_path("snippet_cases.json")));
  REQUIRE(cases.size() >= 50);
  for (const auto& item : cases) {
    CAPTURE(item["name"].get<std::string>());
    CHECK(detect_code_snippet(item["body"].get<std::string>()) ==
          item["expected"].get<bool>());
  }
}

TEST_CASE("inserting a fence flips detection, stripping backticks clears it") {
  Rng rng(88);
  const std::vector<std::string> fragments = {
      "some text",  "# heading", "- list item", "another paragraph",
      "`inline`",   "",          "  indented",  "trailing words"};
  for (int trial = 0; trial < 60; ++trial) {
    std::string body;
    size_t lines = rng.below(6);
    for (size_t i = 0; i < lines; ++i) {
      body += fragments[rng.below(fragments.size())];
      body += '\n';
    }
    std::string with_fence = body + "```\ncode line\n```\n";
    CHECK(detect_code_snippet(with_fence));

    std::string stripped;
    for (char c : with_fence) {
      if (c != '`') stripped.push_back(c);
    }
    CHECK(!detect_code_snippet(stripped));
  }
}

TEST_CASE("detect_language recognizes plain english") {
  auto profiles = load_profiles(profiles_dir());
  REQUIRE(profiles.size() >= 7);
  auto [tag, confidence] =
      detect_language("the quick brown fox jumps over the lazy dog", profiles);
  CHECK(tag == "eng");
  CHECK(confidence > 0.0);
}

TEST_CASE("detect_language floors short and empty input to und") {
  auto profiles = load_profiles(profiles_dir());
  CHECK(detect_language("", profiles) == std::pair<std::string, double>{"und", 0.0});
  CHECK(detect_language("ok bye", profiles).first == "und");
  CHECK(detect_language("12345 67890 !!!", profiles).first == "und");
}

TEST_CASE("script filtering leaves no candidates for unseen scripts") {
  std::vector<LanguageProfile> latin_only;
  for (auto& profile : load_profiles(profiles_dir())) {
    if (profile.language_tag != "rus" && profile.language_tag != "zho") {
      latin_only.push_back(std::move(profile));
    }
  }
  auto [tag, confidence] =
      detect_language("Программа аварийно завершается при сохранении файла", latin_only);
  CHECK(tag == "und");
  CHECK(confidence == 0.0);
}

TEST_CASE("detector hits at least 90 percent on the held-out fixture") {
  auto profiles = load_profiles(profiles_dir());
  std::ifstream in(fixture_path("language_samples.tsv"));
  REQUIRE(in.good());
  std::string line;
  int total = 0, correct = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto tab = line.find('\t');
    REQUIRE(tab != std::string::npos);
    std::string gold = line.substr(0, tab);
    auto [tag, confidence] = detect_language(line.substr(tab + 1), profiles);
    ++total;
    if (tag == gold) ++correct;
  }
  CHECK(total == 100);
  CHECK(correct >= 90);
}

TEST_CASE("profiles round-trip through their file format") {
  LanguageProfile profile = build_profile("tst", "hello hello world words", "unit corpus");
  auto dir = testsupport::make_temp_dir("profile");
  auto path = (dir / "tst.profile").string();
  save_profile(profile, path);
  LanguageProfile loaded = load_profile(path);
  CHECK(loaded.language_tag == "tst");
  CHECK(loaded.source_note == "unit corpus");
  CHECK(loaded.trigrams == profile.trigrams);
  std::filesystem::remove_all(dir);
}

TEST_CASE("profile ranks are dense and capped") {
  std::string corpus = read_file(std::string(ISSUETAG_SOURCE_DIR) + "/data/corpora/eng.txt");
  LanguageProfile profile = build_profile("eng", corpus, "probe");
  CHECK(profile.size() <= kProfileCap);
  CHECK(profile.size() > 100);
  for (size_t i = 0; i < profile.size(); ++i) {
    CHECK(profile.rank_of.at(profile.trigrams[i]) == static_cast<int>(i));
  }
}

namespace {

Dataset snippet_mix_dataset(size_t with_snippets, size_t without) {
  Dataset dataset;
  for (size_t i = 0; i < with_snippets; ++i) {
    LabeledIssue issue;
    issue.id = "s" + std::to_string(i);
    issue.label = canonical_labels()[i % 3];
    issue.title = "crash report " + std::to_string(i);
    issue.body = "trace:\n```\nstack frame " + std::to_string(i) + "\n```\nend";
    dataset.issues.push_back(issue);
  }
  for (size_t i = 0; i < without; ++i) {
    LabeledIssue issue;
    issue.id = "p" + std::to_string(i);
    issue.label = canonical_labels()[i % 3];
    issue.title = "plain report " + std::to_string(i);
    issue.body = "no fenced code here, just words " + std::to_string(i);
    dataset.issues.push_back(issue);
  }
  return dataset;
}

}  // namespace

TEST_CASE("build_treatment samples only qualifying issues, reproducibly") {
  Dataset dataset = snippet_mix_dataset(40, 60);
  TreatmentSpec spec;
  spec.kind = TreatmentKind::CodeSnippetPresence;
  spec.size = 25;
  spec.seed = 5;
  TreatmentPair pair = build_treatment(dataset, spec);
  CHECK(pair.treatment.size() == 25);
  CHECK(pair.baseline.size() == 25);
  for (const auto& issue : pair.treatment.issues) {
    CHECK(detect_code_snippet(issue.body));  // re-check the predicate
  }
  TreatmentPair again = build_treatment(dataset, spec);
  for (size_t i = 0; i < pair.treatment.size(); ++i) {
    CHECK(again.treatment.issues[i].id == pair.treatment.issues[i].id);
  }
  for (size_t i = 0; i < pair.baseline.size(); ++i) {
    CHECK(again.baseline.issues[i].id == pair.baseline.issues[i].id);
  }
}

TEST_CASE("build_treatment reports insufficient qualifying issues") {
  Dataset dataset = snippet_mix_dataset(3, 10);
  TreatmentSpec spec;
  spec.kind = TreatmentKind::CodeSnippetPresence;
  spec.size = 5;
  spec.seed = 1;
  try {
    build_treatment(dataset, spec);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("3") != std::string::npos);
  }
  spec.size = 0;
  CHECK_THROWS_AS(build_treatment(dataset, spec), std::invalid_argument);
}

TEST_CASE("consistent-language treatment keeps only detected-english issues") {
  auto profiles = load_profiles(profiles_dir());
  Dataset dataset;
  const char* english[] = {
      "The window does not remember its position after a restart of the program",
      "Exporting the report as a spreadsheet would help the whole team a lot",
      "The service keeps retrying forever and never shows an error to the user",
      "Please describe the steps that lead to this failure on your machine",
  };
  const char* german[] = {
      "Das Fenster merkt sich seine Position nach einem Neustart nicht mehr",
      "Der Dienst versucht es endlos erneut und zeigt keine Fehlermeldung an",
  };
  int counter = 0;
  for (const char* text : english) {
    LabeledIssue issue;
    issue.id = "e" + std::to_string(counter++);
    issue.label = "bug";
    issue.title = text;
    dataset.issues.push_back(issue);
  }
  for (const char* text : german) {
    LabeledIssue issue;
    issue.id = "g" + std::to_string(counter++);
    issue.label = "bug";
    issue.title = text;
    dataset.issues.push_back(issue);
  }
  TreatmentSpec spec;
  spec.kind = TreatmentKind::ConsistentLanguage;
  spec.size = 3;
  spec.seed = 9;
  TreatmentPair pair = build_treatment(dataset, spec, profiles, "eng");
  CHECK(pair.treatment.size() == 3);
  for (const auto& issue : pair.treatment.issues) {
    CHECK(issue.id[0] == 'e');
    auto [tag, confidence] = detect_language(issue.title, profiles);
    CHECK(tag == "eng");
    CHECK(confidence > 0.0);
  }
}
