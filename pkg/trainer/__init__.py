"""
Trainer: margin ranking objective, negative sampling, AdaGrad.
"""

from .state import TrainConfig, AdaGradState, EpochRecord, TrainHistory, ADAGRAD_EPSILON
from .sampling import SamplingError, sample_negatives, sample_negatives_batch, corrupt
from .adagrad import NonFiniteGradientError, adagrad_step
from .train import margin_loss, renormalize_entities, train, validation_mrr

__all__ = [
    "TrainConfig",
    "AdaGradState",
    "EpochRecord",
    "TrainHistory",
    "ADAGRAD_EPSILON",
    "SamplingError",
    "sample_negatives",
    "sample_negatives_batch",
    "corrupt",
    "NonFiniteGradientError",
    "adagrad_step",
    "margin_loss",
    "renormalize_entities",
    "train",
    "validation_mrr",
]
