"""Weighted DBOW document embeddings with context-aware occurrence weights."""

from ._core import (
    DEFAULT_CA_TEMPERATURE,
    DEFAULT_IDF_TEMPERATURE,
    Architecture,
    AuxModel,
    AuxModelConfig,
    AuxTrainConfig,
    Corpus,
    TrainConfig,
    ca_weights,
    idf_weights,
    load_aux_model,
    make_aux_model,
    normalize,
    pearson,
    run,
    sts_evaluate,
    subcommands,
    train_aux_model,
    train_dbow,
    train_skipgram,
    write_synthetic_corpus,
)

__all__ = [
    "DEFAULT_CA_TEMPERATURE",
    "DEFAULT_IDF_TEMPERATURE",
    "Architecture",
    "AuxModel",
    "AuxModelConfig",
    "AuxTrainConfig",
    "Corpus",
    "TrainConfig",
    "ca_weights",
    "idf_weights",
    "load_aux_model",
    "make_aux_model",
    "normalize",
    "pearson",
    "run",
    "sts_evaluate",
    "subcommands",
    "train_aux_model",
    "train_dbow",
    "train_skipgram",
    "write_synthetic_corpus",
]
