// issuetag — train, evaluate and serve the issue label classifier.
//
// Exit codes: 0 success, 1 validation (flags or data), 2 runtime (I/O,
// unreadable model, unavailable port).

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "issuetag/classifier.hpp"
#include "issuetag/confounds.hpp"
#include "issuetag/dataset.hpp"
#include "issuetag/evaluation.hpp"
#include "issuetag/github_client.hpp"
#include "issuetag/service.hpp"

namespace {

constexpr uint64_t kDefaultSeed = 42;

using issuetag::Dataset;
using issuetag::TrainConfig;

struct TrainFlags {
  uint32_t dim = 100;
  uint32_t epochs = 5;
  double learning_rate = 0.1;
  uint32_t min_count = 14;
  uint32_t word_ngrams = 1;
  uint32_t char_ngram_min = 0;
  uint32_t char_ngram_max = 0;
  uint64_t buckets = 2'000'000;
  std::string loss = "flat";
  uint64_t seed = kDefaultSeed;

  TrainConfig to_config() const {
    TrainConfig config;
    config.dim = dim;
    config.epochs = epochs;
    config.learning_rate = learning_rate;
    config.min_count = min_count;
    config.word_ngrams = word_ngrams;
    config.char_ngram_min = char_ngram_min;
    config.char_ngram_max = char_ngram_max;
    config.hashing_buckets = buckets;
    config.loss_mode = loss == "hier" ? issuetag::LossMode::HierarchicalSoftmax
                                      : issuetag::LossMode::FlatSoftmax;
    config.seed = seed;
    return config;
  }
};

void add_train_flags(CLI::App* cmd, TrainFlags& flags) {
  cmd->add_option("--dim", flags.dim, "Embedding width")->capture_default_str();
  cmd->add_option("--epochs", flags.epochs, "Training epochs")->capture_default_str();
  cmd->add_option("--lr", flags.learning_rate, "Initial learning rate (decays linearly to 0)")
      ->capture_default_str();
  cmd->add_option("--min-count", flags.min_count, "Keep words occurring at least this often")
      ->capture_default_str();
  cmd->add_option("--word-ngrams", flags.word_ngrams, "Word n-gram order (1 = unigrams only)")
      ->capture_default_str();
  cmd->add_option("--char-ngram-min", flags.char_ngram_min,
                  "Shortest character n-gram (0 disables; conventional range is 3..6)")
      ->capture_default_str();
  cmd->add_option("--char-ngram-max", flags.char_ngram_max, "Longest character n-gram")
      ->capture_default_str();
  cmd->add_option("--buckets", flags.buckets, "Hash buckets for n-gram features")
      ->capture_default_str();
  cmd->add_option("--loss", flags.loss, "Loss mode")
      ->check(CLI::IsMember({"flat", "hier"}))
      ->capture_default_str();
  cmd->add_option("--seed", flags.seed, "Training RNG seed")->capture_default_str();
}

Dataset load_dataset_any(const std::string& path, const std::string& format) {
  std::string effective = format;
  if (effective == "auto") {
    effective = path.ends_with(".csv") ? "csv" : "fasttext";
  }
  if (effective == "csv") {
    auto result = issuetag::load_csv(path);
    if (result.multi_label_skipped > 0) {
      std::cerr << "warning: skipped " << result.multi_label_skipped
                << " multi-label rows\n";
    }
    return result.dataset;
  }
  return issuetag::load_fasttext(path);
}

std::vector<issuetag::LabeledTokens> to_corpus(const Dataset& dataset) {
  if (!dataset.fully_labeled()) {
    throw issuetag::ValidationError("every issue must carry a label");
  }
  std::vector<issuetag::LabeledTokens> corpus;
  corpus.reserve(dataset.issues.size());
  for (const auto& issue : dataset.issues) {
    issuetag::RawIssue raw{issue.title, issue.body};
    corpus.emplace_back(issuetag::tokenize(issuetag::concatenate(raw)), *issue.label);
  }
  return corpus;
}

std::string format_prediction(const issuetag::Prediction& pred,
                              const std::vector<std::string>& labels) {
  std::string line = pred.argmax_label + "\t";
  char buf[64];
  for (size_t i = 0; i < labels.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%s%s=%.6f", i == 0 ? "" : " ", labels[i].c_str(),
                  pred.scores[i]);
    line += buf;
  }
  return line;
}

int cmd_train(const std::string& input, const std::string& format, const std::string& output,
              const TrainFlags& flags, const std::vector<std::string>& label_set) {
  Dataset dataset = load_dataset_any(input, format);
  auto corpus = to_corpus(dataset);
  issuetag::Model model = issuetag::train(corpus, flags.to_config(), label_set);
  issuetag::save(model, output);

  std::vector<issuetag::LabeledBag> bags;
  bags.reserve(corpus.size());
  for (const auto& [tokens, label] : corpus) {
    uint32_t label_id = 0;
    for (uint32_t i = 0; i < model.labels.size(); ++i) {
      if (model.labels[i] == label) label_id = i;
    }
    bags.emplace_back(issuetag::featurize_for_config(tokens, model.vocab, model.config), label_id);
  }
  std::cout << "final loss: " << issuetag::loss(bags, model) << "\n";
  std::cout << "vocabulary size: " << model.vocab.size() << "\n";
  std::cout << "model file: " << output << " (" << std::filesystem::file_size(output)
            << " bytes)\n";
  std::cout << "config fingerprint: " << model.config.fingerprint() << "\n";
  return 0;
}

int cmd_predict(const std::string& model_path, const std::string& text,
                const std::string& input) {
  issuetag::Model model = issuetag::load(model_path);
  if (!input.empty()) {
    std::ifstream in(input);
    if (!in) {
      throw issuetag::ValidationError("cannot open \"" + input + "\"");
    }
    std::string line;
    while (std::getline(in, line)) {
      std::cout << format_prediction(issuetag::predict_text(line, model), model.labels) << "\n";
    }
  } else {
    std::cout << format_prediction(issuetag::predict_text(text, model), model.labels) << "\n";
  }
  return 0;
}

int cmd_evaluate(const std::string& protocol, const std::string& input, const std::string& test,
                 const std::string& format, uint32_t k, uint64_t fold_seed,
                 const std::string& aggregation, unsigned jobs, const std::string& report_path,
                 const TrainFlags& flags) {
  issuetag::EvaluationReport report;
  if (protocol == "cv") {
    Dataset dataset = load_dataset_any(input, format);
    issuetag::EvaluateOptions options;
    options.aggregation = aggregation == "per-fold" ? issuetag::FoldAggregation::PerFoldMean
                                                    : issuetag::FoldAggregation::Pooled;
    options.jobs = jobs;
    report = issuetag::cross_validate(dataset, k, flags.to_config(), fold_seed, options);
  } else {
    if (test.empty()) {
      throw CLI::ValidationError("--protocol holdout requires --test");
    }
    Dataset train_set = load_dataset_any(input, format);
    Dataset test_set = load_dataset_any(test, format);
    report = issuetag::evaluate_holdout(train_set, test_set, flags.to_config());
  }
  std::cout << report.to_text_table();
  if (!report_path.empty()) {
    std::ofstream out(report_path, std::ios::binary | std::ios::trunc);
    if (!out || !(out << report.to_json())) {
      throw std::runtime_error("cannot write report to \"" + report_path + "\"");
    }
    std::cout << "report written to " << report_path << "\n";
  }
  return 0;
}

int cmd_compare(const std::string& baseline_path, const std::string& treatment_path) {
  auto read_report = [](const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      throw issuetag::ValidationError("cannot open \"" + path + "\"");
    }
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return issuetag::EvaluationReport::from_json(text);
  };
  auto deltas = issuetag::compare_reports(read_report(baseline_path), read_report(treatment_path));
  std::cout << deltas.to_text_table();
  return 0;
}

volatile std::sig_atomic_t g_stop_requested = 0;
issuetag::WebhookService* g_service = nullptr;

void handle_signal(int) {
  g_stop_requested = 1;
  if (g_service) g_service->stop();
}

int cmd_serve(const std::string& model_path, uint16_t port, double confidence_floor,
              std::string api_base, const std::string& bind_address) {
  const char* secret = std::getenv("ISSUETAG_WEBHOOK_SECRET");
  if (!secret || std::string(secret).empty()) {
    throw issuetag::ValidationError("ISSUETAG_WEBHOOK_SECRET is not set");
  }
  issuetag::Model model;
  try {
    model = issuetag::load(model_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  issuetag::GithubClientConfig client_config;
  if (const char* base = std::getenv("ISSUETAG_API_BASE")) client_config.api_base_url = base;
  if (!api_base.empty()) client_config.api_base_url = api_base;
  if (const char* app_id = std::getenv("ISSUETAG_APP_ID")) client_config.app_id = app_id;
  if (const char* key_path = std::getenv("ISSUETAG_PRIVATE_KEY_PATH")) {
    std::ifstream key(key_path);
    if (!key) {
      throw issuetag::ValidationError("cannot read private key at \"" + std::string(key_path) +
                                      "\"");
    }
    client_config.private_key_pem.assign((std::istreambuf_iterator<char>(key)),
                                         std::istreambuf_iterator<char>());
  }

  issuetag::ServiceConfig service_config;
  service_config.webhook_secret = secret;
  service_config.confidence_floor = confidence_floor;
  service_config.bind_address = bind_address;
  issuetag::WebhookService service(std::move(model),
                                   std::make_shared<issuetag::GithubClient>(client_config),
                                   service_config);
  g_service = &service;
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
  bool bound = service.listen(port);
  g_service = nullptr;
  if (!bound && !g_stop_requested) {
    std::cerr << "error: cannot listen on port " << port << "\n";
    return 2;
  }
  return 0;
}

int cmd_dataset_balance(const std::string& input, const std::string& output, size_t per_class,
                        uint64_t seed) {
  Dataset dataset = load_dataset_any(input, "auto");
  Dataset balanced = issuetag::balance(dataset, per_class, seed);
  issuetag::save_csv(balanced, output);
  std::cout << "wrote " << balanced.size() << " issues to " << output << "\n";
  return 0;
}

int cmd_dataset_kfold(const std::string& input, uint32_t k, uint64_t seed,
                      const std::string& output) {
  Dataset dataset = load_dataset_any(input, "auto");
  issuetag::FoldPlan plan = issuetag::stratified_kfold(dataset, k, seed);
  std::ofstream out(output, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open \"" + output + "\" for writing");
  }
  out << "id,fold\n";
  for (const auto& issue : dataset.issues) {
    out << issue.id << ',' << plan.assignment.at(issue.id) << '\n';
  }
  if (!out.flush()) {
    throw std::runtime_error("write failed for \"" + output + "\"");
  }
  std::cout << "wrote fold assignment for " << dataset.size() << " issues to " << output << "\n";
  return 0;
}

int cmd_dataset_export_tfidf(const std::string& input, const std::string& output) {
  Dataset dataset = load_dataset_any(input, "auto");
  auto summary = issuetag::export_tfidf(dataset, output);
  std::cout << "wrote " << summary.documents << " rows, " << summary.terms << " terms, "
            << summary.nonzeros << " entries to " << summary.matrix_path << "\n";
  std::cout << "vocabulary sidecar: " << summary.vocabulary_path << "\n";
  return 0;
}

int cmd_dataset_export_fasttext(const std::string& input, const std::string& output) {
  Dataset dataset = load_dataset_any(input, "auto");
  issuetag::export_fasttext(dataset, output);
  std::cout << "wrote " << dataset.size() << " lines to " << output << "\n";
  return 0;
}

int cmd_dataset_treatment(const std::string& input, const std::string& kind, size_t size,
                          uint64_t seed, const std::string& output_treatment,
                          const std::string& output_baseline, const std::string& profiles_dir,
                          const std::string& language) {
  Dataset dataset = load_dataset_any(input, "auto");
  issuetag::TreatmentSpec spec;
  spec.kind = kind == "code-snippet" ? issuetag::TreatmentKind::CodeSnippetPresence
                                     : issuetag::TreatmentKind::ConsistentLanguage;
  spec.size = size;
  spec.seed = seed;
  std::vector<issuetag::LanguageProfile> profiles;
  if (spec.kind == issuetag::TreatmentKind::ConsistentLanguage) {
    profiles = issuetag::load_profiles(profiles_dir);
  }
  auto pair = issuetag::build_treatment(dataset, spec, profiles, language);
  issuetag::save_csv(pair.treatment, output_treatment);
  issuetag::save_csv(pair.baseline, output_baseline);
  std::cout << "wrote " << pair.treatment.size() << " treatment issues to " << output_treatment
            << "\n";
  std::cout << "wrote " << pair.baseline.size() << " baseline issues to " << output_baseline
            << "\n";
  return 0;
}

int cmd_confounds_build_profile(const std::string& language, const std::string& corpus_path,
                                const std::string& output, const std::string& note, size_t top) {
  std::ifstream in(corpus_path, std::ios::binary);
  if (!in) {
    throw issuetag::ValidationError("cannot open \"" + corpus_path + "\"");
  }
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::string source = note.empty() ? std::filesystem::path(corpus_path).filename().string() : note;
  auto profile = issuetag::build_profile(language, text, source, top);
  issuetag::save_profile(profile, output);
  std::cout << "wrote " << profile.size() << " trigrams to " << output << "\n";
  return 0;
}

int cmd_confounds_detect_language(const std::string& profiles_dir, const std::string& text,
                                  const std::string& input) {
  auto profiles = issuetag::load_profiles(profiles_dir);
  auto report = [&profiles](const std::string& sample) {
    auto [tag, confidence] = issuetag::detect_language(sample, profiles);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", confidence);
    std::cout << tag << "\t" << buf << "\n";
  };
  if (!input.empty()) {
    std::ifstream in(input);
    if (!in) {
      throw issuetag::ValidationError("cannot open \"" + input + "\"");
    }
    std::string line;
    while (std::getline(in, line)) report(line);
  } else {
    report(text);
  }
  return 0;
}

int cmd_confounds_detect_snippet(const std::string& text, const std::string& input) {
  std::string body = text;
  if (!input.empty()) {
    std::ifstream in(input, std::ios::binary);
    if (!in) {
      throw issuetag::ValidationError("cannot open \"" + input + "\"");
    }
    body.assign((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  }
  std::cout << (issuetag::detect_code_snippet(body) ? "true" : "false") << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"issue label classifier: training, evaluation and auto-labeling service"};
  app.require_subcommand(1);

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a model and save it");
  std::string train_input, train_output, train_format = "auto";
  std::vector<std::string> train_labels;
  TrainFlags train_flags;
  train_cmd->add_option("--input", train_input, "Training data (CSV id,label,title,body or fastText lines)")
      ->required();
  train_cmd->add_option("--format", train_format, "Input format")
      ->check(CLI::IsMember({"auto", "csv", "fasttext"}))
      ->capture_default_str();
  train_cmd->add_option("--output", train_output, "Model output path")->required();
  train_cmd->add_option("--labels", train_labels,
                        "Fixed label order (default: sorted distinct labels in the data)");
  add_train_flags(train_cmd, train_flags);

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "Predict labels for issue texts");
  std::string predict_model, predict_text_arg, predict_input;
  predict_cmd->add_option("--model", predict_model, "Model path")->required();
  predict_cmd->add_option("--text", predict_text_arg, "Single text to classify");
  predict_cmd->add_option("--input", predict_input, "File with one text per line");

  // evaluate
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Run cross-validation or holdout evaluation");
  std::string eval_protocol = "cv", eval_input, eval_test, eval_format = "auto";
  std::string eval_aggregation = "pooled", eval_report = "evaluation-report.json";
  uint32_t eval_k = 10;
  uint64_t eval_seed = kDefaultSeed;
  unsigned eval_jobs = 1;
  TrainFlags eval_flags;
  evaluate_cmd->add_option("--protocol", eval_protocol, "Evaluation protocol")
      ->check(CLI::IsMember({"cv", "holdout"}))
      ->capture_default_str();
  evaluate_cmd->add_option("--input", eval_input, "Training/CV dataset")->required();
  evaluate_cmd->add_option("--test", eval_test, "Holdout test dataset");
  evaluate_cmd->add_option("--format", eval_format, "Input format")
      ->check(CLI::IsMember({"auto", "csv", "fasttext"}))
      ->capture_default_str();
  evaluate_cmd->add_option("--k", eval_k, "Number of folds")->capture_default_str();
  evaluate_cmd->add_option("--fold-seed", eval_seed, "Fold assignment seed")
      ->capture_default_str();
  evaluate_cmd->add_option("--aggregation", eval_aggregation, "Fold metric aggregation")
      ->check(CLI::IsMember({"pooled", "per-fold"}))
      ->capture_default_str();
  evaluate_cmd->add_option("--jobs", eval_jobs, "Folds trained in parallel")
      ->capture_default_str();
  evaluate_cmd->add_option("--report", eval_report, "Report JSON output path (empty to skip)")
      ->capture_default_str();
  add_train_flags(evaluate_cmd, eval_flags);

  // compare
  auto* compare_cmd = app.add_subcommand("compare", "Metric deltas between two reports");
  std::string compare_baseline, compare_treatment;
  compare_cmd->add_option("--baseline", compare_baseline, "Baseline report JSON")->required();
  compare_cmd->add_option("--treatment", compare_treatment, "Treatment report JSON")->required();

  // dataset
  auto* dataset_cmd = app.add_subcommand("dataset", "Dataset construction and exports");
  dataset_cmd->require_subcommand(1);

  auto* balance_cmd = dataset_cmd->add_subcommand("balance", "Uniform per-class sample");
  std::string balance_input, balance_output;
  size_t balance_per_class = 0;
  uint64_t balance_seed = kDefaultSeed;
  balance_cmd->add_option("--input", balance_input, "Input dataset")->required();
  balance_cmd->add_option("--output", balance_output, "Output CSV")->required();
  balance_cmd->add_option("--per-class", balance_per_class, "Issues to sample per class")
      ->required();
  balance_cmd->add_option("--seed", balance_seed, "Sampling seed")->capture_default_str();

  auto* kfold_cmd = dataset_cmd->add_subcommand("kfold", "Stratified fold assignment");
  std::string kfold_input, kfold_output;
  uint32_t kfold_k = 10;
  uint64_t kfold_seed = kDefaultSeed;
  kfold_cmd->add_option("--input", kfold_input, "Input dataset")->required();
  kfold_cmd->add_option("--k", kfold_k, "Number of folds")->capture_default_str();
  kfold_cmd->add_option("--seed", kfold_seed, "Shuffle seed")->capture_default_str();
  kfold_cmd->add_option("--output", kfold_output, "Fold assignment CSV (id,fold)")->required();

  auto* tfidf_cmd = dataset_cmd->add_subcommand("export-tfidf",
                                                "Document-term matrix for external baselines");
  std::string tfidf_input, tfidf_output;
  tfidf_cmd->add_option("--input", tfidf_input, "Input dataset")->required();
  tfidf_cmd->add_option("--output", tfidf_output,
                        "Matrix output path (vocabulary sidecar gets .vocab appended)")
      ->required();

  auto* fasttext_cmd = dataset_cmd->add_subcommand("export-fasttext", "fastText line format");
  std::string fasttext_input, fasttext_output;
  fasttext_cmd->add_option("--input", fasttext_input, "Input dataset")->required();
  fasttext_cmd->add_option("--output", fasttext_output, "Output path")->required();

  auto* treatment_cmd = dataset_cmd->add_subcommand("treatment",
                                                    "Confounding-factor treatment and baseline arms");
  std::string treatment_input, treatment_kind, treatment_out_t, treatment_out_b;
  std::string treatment_profiles = "data/profiles", treatment_language = "eng";
  size_t treatment_size = 0;
  uint64_t treatment_seed = kDefaultSeed;
  treatment_cmd->add_option("--input", treatment_input, "Input dataset")->required();
  treatment_cmd->add_option("--kind", treatment_kind, "Treatment predicate")
      ->check(CLI::IsMember({"consistent-language", "code-snippet"}))
      ->required();
  treatment_cmd->add_option("--size", treatment_size, "Issues per arm")->required();
  treatment_cmd->add_option("--seed", treatment_seed, "Sampling seed")->capture_default_str();
  treatment_cmd->add_option("--output-treatment", treatment_out_t, "Treatment arm CSV")
      ->required();
  treatment_cmd->add_option("--output-baseline", treatment_out_b, "Baseline arm CSV")->required();
  treatment_cmd->add_option("--profiles", treatment_profiles, "Language profile directory")
      ->capture_default_str();
  treatment_cmd->add_option("--language", treatment_language, "Language tag to keep")
      ->capture_default_str();

  // confounds
  auto* confounds_cmd = app.add_subcommand("confounds", "Language and snippet detection tools");
  confounds_cmd->require_subcommand(1);

  auto* profile_cmd = confounds_cmd->add_subcommand("build-profile",
                                                    "Build a trigram profile from a corpus");
  std::string profile_language, profile_corpus, profile_output, profile_note;
  size_t profile_top = issuetag::kProfileCap;
  profile_cmd->add_option("--language", profile_language, "Language tag, e.g. eng")->required();
  profile_cmd->add_option("--corpus", profile_corpus, "UTF-8 corpus text file")->required();
  profile_cmd->add_option("--output", profile_output, "Profile output path")->required();
  profile_cmd->add_option("--note", profile_note, "Source corpus note for the header");
  profile_cmd->add_option("--top", profile_top, "Trigram cap")->capture_default_str();

  auto* detect_lang_cmd = confounds_cmd->add_subcommand("detect-language",
                                                        "Detect the language of texts");
  std::string detect_lang_profiles = "data/profiles", detect_lang_text, detect_lang_input;
  detect_lang_cmd->add_option("--profiles", detect_lang_profiles, "Language profile directory")
      ->capture_default_str();
  detect_lang_cmd->add_option("--text", detect_lang_text, "Single text");
  detect_lang_cmd->add_option("--input", detect_lang_input, "File with one text per line");

  auto* detect_snippet_cmd = confounds_cmd->add_subcommand("detect-snippet",
                                                           "Check for fenced code blocks");
  std::string detect_snippet_text, detect_snippet_input;
  detect_snippet_cmd->add_option("--text", detect_snippet_text, "Body text");
  detect_snippet_cmd->add_option("--input", detect_snippet_input, "File holding the body");

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "Run the auto-labeling webhook service");
  std::string serve_model, serve_api_base, serve_bind = "0.0.0.0";
  uint16_t serve_port = 8080;
  double serve_floor = 0.0;
  serve_cmd->add_option("--model", serve_model, "Model path")->required();
  serve_cmd->add_option("--port", serve_port, "Listen port")->capture_default_str();
  serve_cmd->add_option("--confidence-floor", serve_floor,
                        "Skip labeling when the top score is below this")
      ->capture_default_str();
  serve_cmd->add_option("--api-base", serve_api_base,
                        "Platform API base URL (default https://api.github.com; "
                        "env ISSUETAG_API_BASE)");
  serve_cmd->add_option("--bind", serve_bind, "Bind address")->capture_default_str();
  serve_cmd->footer("Secrets come from the environment: ISSUETAG_WEBHOOK_SECRET (required),\n"
                    "ISSUETAG_APP_ID and ISSUETAG_PRIVATE_KEY_PATH for the platform API.");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (*train_cmd) {
      return cmd_train(train_input, train_format, train_output, train_flags, train_labels);
    }
    if (*predict_cmd) {
      if (predict_text_arg.empty() && predict_input.empty() &&
          !predict_cmd->count("--text")) {
        std::cerr << "error: provide --text or --input\n";
        return 1;
      }
      return cmd_predict(predict_model, predict_text_arg, predict_input);
    }
    if (*evaluate_cmd) {
      return cmd_evaluate(eval_protocol, eval_input, eval_test, eval_format, eval_k, eval_seed,
                          eval_aggregation, eval_jobs, eval_report, eval_flags);
    }
    if (*compare_cmd) {
      return cmd_compare(compare_baseline, compare_treatment);
    }
    if (*balance_cmd) {
      return cmd_dataset_balance(balance_input, balance_output, balance_per_class, balance_seed);
    }
    if (*kfold_cmd) {
      return cmd_dataset_kfold(kfold_input, kfold_k, kfold_seed, kfold_output);
    }
    if (*tfidf_cmd) {
      return cmd_dataset_export_tfidf(tfidf_input, tfidf_output);
    }
    if (*fasttext_cmd) {
      return cmd_dataset_export_fasttext(fasttext_input, fasttext_output);
    }
    if (*treatment_cmd) {
      return cmd_dataset_treatment(treatment_input, treatment_kind, treatment_size,
                                   treatment_seed, treatment_out_t, treatment_out_b,
                                   treatment_profiles, treatment_language);
    }
    if (*profile_cmd) {
      return cmd_confounds_build_profile(profile_language, profile_corpus, profile_output,
                                         profile_note, profile_top);
    }
    if (*detect_lang_cmd) {
      return cmd_confounds_detect_language(detect_lang_profiles, detect_lang_text,
                                           detect_lang_input);
    }
    if (*detect_snippet_cmd) {
      return cmd_confounds_detect_snippet(detect_snippet_text, detect_snippet_input);
    }
    if (*serve_cmd) {
      return cmd_serve(serve_model, serve_port, serve_floor, serve_api_base, serve_bind);
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const issuetag::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const issuetag::CsvError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const issuetag::ModelFormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
