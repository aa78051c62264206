"""Issue label classifier: training, evaluation and confound tooling."""

from issuetag._core import (
    Dataset,
    LanguageProfile,
    Model,
    ModelFormatError,
    TrainConfig,
    ValidationError,
    balance,
    build_profile,
    char_ngrams,
    concatenate,
    cross_validate,
    dataset_from_rows,
    detect_code_snippet,
    detect_language,
    evaluate_holdout,
    export_tfidf,
    load_csv,
    load_model,
    load_profiles,
    save_csv,
    stratified_kfold,
    tokenize,
    train,
    verify_signature,
)

__all__ = [
    "Dataset",
    "LanguageProfile",
    "Model",
    "ModelFormatError",
    "TrainConfig",
    "ValidationError",
    "balance",
    "build_profile",
    "char_ngrams",
    "concatenate",
    "cross_validate",
    "dataset_from_rows",
    "detect_code_snippet",
    "detect_language",
    "evaluate_holdout",
    "export_tfidf",
    "load_csv",
    "load_model",
    "load_profiles",
    "save_csv",
    "stratified_kfold",
    "tokenize",
    "train",
    "verify_signature",
]

__version__ = "0.1.0"
