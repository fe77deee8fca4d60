"""
Training State - Hyperparameters, optimizer accumulators and per-epoch history.
"""

from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Iterator, List, Optional, Tuple

import numpy as np
import pandas as pd

from models import Model

ADAGRAD_EPSILON = 1e-8


@dataclass
class TrainConfig:
    """
    Hyperparameters of the margin ranking objective.
    Defaults follow the FB15k setup: 10 mini-batches, lr 0.1, L2 1e-4.
    """
    epochs: int = 100
    batches: int = 10
    learning_rate: float = 0.1
    margin: float = 1.0
    l2: float = 1e-4
    seed: int = 0

    # validation MRR every N epochs (0 disables) on at most valid_sample triples
    eval_every: int = 0
    valid_sample: int = 1000

    chunk_size: int = 256
    max_sampling_attempts: int = 100

    # one subject-corrupted and one object-corrupted negative per positive
    negatives_per_positive: int = field(default=2, init=False)

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError(f"epochs must be >= 0, got {self.epochs}")
        if self.batches < 1:
            raise ValueError(f"batches must be >= 1, got {self.batches}")
        if self.learning_rate < 0:
            raise ValueError(f"learning_rate must be >= 0, got {self.learning_rate}")
        if self.margin <= 0:
            raise ValueError(f"margin must be > 0, got {self.margin}")
        if self.l2 < 0:
            raise ValueError(f"l2 must be >= 0, got {self.l2}")
        if self.eval_every < 0 or self.valid_sample < 1 or self.chunk_size < 1:
            raise ValueError("eval_every must be >= 0, valid_sample and chunk_size >= 1")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


class AdaGradState:
    """Accumulated squared gradients, one array per parameter."""

    def __init__(self, accumulators: Dict[str, np.ndarray], epsilon: float = ADAGRAD_EPSILON, steps: int = 0):
        self.accumulators = accumulators
        self.epsilon = epsilon
        self.steps = steps

    @classmethod
    def for_model(cls, model: Model, epsilon: float = ADAGRAD_EPSILON) -> "AdaGradState":
        return cls({name: np.zeros_like(array) for name, array in model.parameters()}, epsilon)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.accumulators[name]

    def items(self) -> Iterator[Tuple[str, np.ndarray]]:
        return iter(self.accumulators.items())

    def copy(self) -> "AdaGradState":
        return AdaGradState({n: a.copy() for n, a in self.accumulators.items()}, self.epsilon, self.steps)


@dataclass
class EpochRecord:
    epoch: int
    mean_loss: float
    active_pairs: int
    pairs: int
    seconds: float = 0.0
    valid_mrr: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class TrainHistory:
    """One record per completed epoch."""
    epochs: List[EpochRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.epochs)

    def append(self, record: EpochRecord) -> None:
        self.epochs.append(record)

    @property
    def losses(self) -> List[float]:
        return [r.mean_loss for r in self.epochs]

    def to_frame(self) -> pd.DataFrame:
        columns = ["epoch", "mean_loss", "active_pairs", "pairs", "seconds", "valid_mrr"]
        return pd.DataFrame([r.to_dict() for r in self.epochs], columns=columns)

    def to_dict(self) -> Dict[str, Any]:
        return {"epochs": [r.to_dict() for r in self.epochs]}
