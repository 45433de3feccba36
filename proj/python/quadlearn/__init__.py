"""Quadrotor trajectory tracking with a fuzzy-supervised, online-trained neural controller."""

from ._core import (
    Config,
    Dataset,
    Model,
    QuadlearnError,
    collect,
    fly,
    fuzzy_mapping,
    improvement_ratio,
    mamdani_oracle,
    pretrain,
)

__all__ = [
    "Config",
    "Dataset",
    "Model",
    "QuadlearnError",
    "collect",
    "fly",
    "fuzzy_mapping",
    "improvement_ratio",
    "mamdani_oracle",
    "pretrain",
]
