// Python bindings for the main operations: text pipeline, training,
// prediction, dataset construction, evaluation and the confound detectors.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "issuetag/classifier.hpp"
#include "issuetag/confounds.hpp"
#include "issuetag/dataset.hpp"
#include "issuetag/evaluation.hpp"
#include "issuetag/webhook.hpp"

namespace py = pybind11;
using namespace issuetag;

namespace {

TrainConfig config_from_kwargs(uint32_t dim, uint32_t epochs, double lr, uint32_t min_count,
                               uint32_t word_ngrams, uint32_t char_ngram_min,
                               uint32_t char_ngram_max, uint64_t buckets, const std::string& loss,
                               uint64_t seed) {
  TrainConfig config;
  config.dim = dim;
  config.epochs = epochs;
  config.learning_rate = lr;
  config.min_count = min_count;
  config.word_ngrams = word_ngrams;
  config.char_ngram_min = char_ngram_min;
  config.char_ngram_max = char_ngram_max;
  config.hashing_buckets = buckets;
  config.loss_mode = loss == "hier" ? LossMode::HierarchicalSoftmax : LossMode::FlatSoftmax;
  config.seed = seed;
  return config;
}

Dataset dataset_from_rows(const std::vector<std::tuple<std::string, std::string, std::string,
                                                       std::string>>& rows) {
  Dataset dataset;
  for (const auto& [id, label, title, body] : rows) {
    LabeledIssue issue;
    issue.id = id;
    if (!label.empty()) {
      auto canonical = normalize_label(label);
      if (!canonical) throw ValidationError("unknown label \"" + label + "\"");
      issue.label = *canonical;
    }
    issue.title = title;
    issue.body = body;
    dataset.issues.push_back(std::move(issue));
  }
  return dataset;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Issue label classifier core";

  py::register_exception<ValidationError>(m, "ValidationError");
  py::register_exception<ModelFormatError>(m, "ModelFormatError");

  // text pipeline
  m.def("concatenate",
        [](const std::string& title, const std::string& body) {
          return concatenate(RawIssue{title, body});
        },
        py::arg("title"), py::arg("body"));
  m.def("tokenize", &tokenize, py::arg("text"));
  m.def("char_ngrams", &char_ngrams, py::arg("token"), py::arg("min_n") = 3, py::arg("max_n") = 6);

  // classifier
  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init(&config_from_kwargs), py::arg("dim") = 100, py::arg("epochs") = 5,
           py::arg("lr") = 0.1, py::arg("min_count") = 14, py::arg("word_ngrams") = 1,
           py::arg("char_ngram_min") = 0, py::arg("char_ngram_max") = 0,
           py::arg("buckets") = 2'000'000, py::arg("loss") = "flat", py::arg("seed") = 42)
      .def_readwrite("dim", &TrainConfig::dim)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("learning_rate", &TrainConfig::learning_rate)
      .def_readwrite("min_count", &TrainConfig::min_count)
      .def_readwrite("word_ngrams", &TrainConfig::word_ngrams)
      .def_readwrite("char_ngram_min", &TrainConfig::char_ngram_min)
      .def_readwrite("char_ngram_max", &TrainConfig::char_ngram_max)
      .def_readwrite("hashing_buckets", &TrainConfig::hashing_buckets)
      .def_readwrite("seed", &TrainConfig::seed)
      .def("fingerprint", &TrainConfig::fingerprint);

  py::class_<Model>(m, "Model")
      .def_property_readonly("labels", [](const Model& model) { return model.labels; })
      .def_property_readonly("vocab_size", [](const Model& model) { return model.vocab.size(); })
      .def("fingerprint", &Model::fingerprint)
      .def("predict",
           [](const Model& model, const std::string& text) {
             Prediction pred = predict_text(text, model);
             py::dict scores;
             for (size_t i = 0; i < model.labels.size(); ++i) {
               scores[py::str(model.labels[i])] = pred.scores[i];
             }
             return py::make_tuple(pred.argmax_label, scores);
           },
           py::arg("text"))
      .def("save", [](const Model& model, const std::string& path) { save(model, path); },
           py::arg("path"));

  m.def("train",
        [](const std::vector<std::pair<std::string, std::string>>& examples,
           const TrainConfig& config, const std::vector<std::string>& labels) {
          std::vector<LabeledTokens> corpus;
          corpus.reserve(examples.size());
          for (const auto& [text, label] : examples) {
            corpus.emplace_back(tokenize(text), label);
          }
          return train(corpus, config, labels);
        },
        py::arg("examples"), py::arg("config") = TrainConfig{},
        py::arg("labels") = std::vector<std::string>{},
        "Train from (text, label) pairs.");
  m.def("load_model", &load, py::arg("path"));

  // dataset
  m.def("dataset_from_rows", &dataset_from_rows, py::arg("rows"),
        "Build a dataset from (id, label, title, body) tuples.");
  py::class_<Dataset>(m, "Dataset")
      .def_property_readonly("size", &Dataset::size)
      .def("label_histogram", &Dataset::label_histogram)
      .def("rows", [](const Dataset& dataset) {
        std::vector<std::tuple<std::string, std::string, std::string, std::string>> rows;
        rows.reserve(dataset.issues.size());
        for (const auto& issue : dataset.issues) {
          rows.emplace_back(issue.id, issue.label.value_or(""), issue.title, issue.body);
        }
        return rows;
      });
  m.def("load_csv", &load_csv_dataset, py::arg("path"));
  m.def("save_csv", &save_csv, py::arg("dataset"), py::arg("path"));
  m.def("balance", &balance, py::arg("dataset"), py::arg("per_class"), py::arg("seed") = 42);
  m.def("stratified_kfold",
        [](const Dataset& dataset, uint32_t k, uint64_t seed) {
          return stratified_kfold(dataset, k, seed).assignment;
        },
        py::arg("dataset"), py::arg("k"), py::arg("seed") = 42,
        "Returns a dict mapping issue id to fold index.");
  m.def("export_tfidf",
        [](const Dataset& dataset, const std::string& path) {
          TfidfSummary summary = export_tfidf(dataset, path);
          py::dict out;
          out["documents"] = summary.documents;
          out["terms"] = summary.terms;
          out["nonzeros"] = summary.nonzeros;
          out["matrix_path"] = summary.matrix_path;
          out["vocabulary_path"] = summary.vocabulary_path;
          return out;
        },
        py::arg("dataset"), py::arg("path"));

  // evaluation
  m.def("cross_validate",
        [](const Dataset& dataset, uint32_t k, const TrainConfig& config, uint64_t seed) {
          return cross_validate(dataset, k, config, seed).to_json();
        },
        py::arg("dataset"), py::arg("k"), py::arg("config") = TrainConfig{},
        py::arg("seed") = 42, "Returns the evaluation report as JSON.");
  m.def("evaluate_holdout",
        [](const Dataset& train_set, const Dataset& test_set, const TrainConfig& config) {
          return evaluate_holdout(train_set, test_set, config).to_json();
        },
        py::arg("train"), py::arg("test"), py::arg("config") = TrainConfig{});

  // confounds
  m.def("detect_code_snippet", &detect_code_snippet, py::arg("body"));
  py::class_<LanguageProfile>(m, "LanguageProfile")
      .def_property_readonly("language_tag",
                             [](const LanguageProfile& p) { return p.language_tag; })
      .def_property_readonly("size", &LanguageProfile::size);
  m.def("build_profile", &build_profile, py::arg("language_tag"), py::arg("corpus_text"),
        py::arg("source_note"), py::arg("cap") = kProfileCap);
  m.def("load_profiles", &load_profiles, py::arg("directory"));
  m.def("detect_language", &detect_language, py::arg("text"), py::arg("profiles"));

  // webhook
  m.def("verify_signature",
        [](const py::bytes& raw_body, const std::string& signature_header,
           const py::bytes& secret) {
          return verify_signature(std::string(raw_body), signature_header, std::string(secret));
        },
        py::arg("raw_body"), py::arg("signature_header"), py::arg("secret"));
}
