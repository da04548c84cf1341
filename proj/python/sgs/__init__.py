"""Semantic-driven photo/sketch synthesis: data generation, graph features, metrics and training."""

from ._sgs import (
    ConfigError,
    DataError,
    Generator,
    NumericError,
    ShapeError,
    TrainConfig,
    build_graphs,
    corpus_stats,
    frechet_distance,
    fsim,
    generate_corpus,
    generate_sample,
    graph_losses,
    load_corpus,
    phase_congruency,
    ssim,
    train_stage0,
)

__all__ = [
    "ConfigError",
    "DataError",
    "Generator",
    "NumericError",
    "ShapeError",
    "TrainConfig",
    "build_graphs",
    "corpus_stats",
    "frechet_distance",
    "fsim",
    "generate_corpus",
    "generate_sample",
    "graph_losses",
    "load_corpus",
    "phase_congruency",
    "ssim",
    "train_stage0",
]
