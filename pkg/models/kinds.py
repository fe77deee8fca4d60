"""
Model kinds, projection modes and argument slots.
"""

from enum import Enum
from typing import Dict, Tuple


class ModelKind(str, Enum):
    TRANSE = "transe"
    DISTMULT = "distmult"
    BILINEAR = "bilinear"
    BILINEAR_LINEAR = "bilinear-linear"
    NTN = "ntn"

    @classmethod
    def parse(cls, value) -> "ModelKind":
        if isinstance(value, cls):
            return value
        normalized = str(value).strip().lower().replace("_", "-")
        for kind in cls:
            if kind.value == normalized:
                return kind
        raise ValueError(f"Unknown model kind '{value}', expected one of {[k.value for k in cls]}")

    @property
    def composable(self) -> bool:
        """Whether relation embeddings can be composed along paths."""
        return self in (ModelKind.TRANSE, ModelKind.DISTMULT, ModelKind.BILINEAR)


class Projection(str, Enum):
    LINEAR = "linear"
    TANH = "tanh"

    @classmethod
    def parse(cls, value) -> "Projection":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(f"Unknown projection '{value}', expected 'linear' or 'tanh'") from None


class Slot(str, Enum):
    SUBJECT = "subject"
    OBJECT = "object"

    @classmethod
    def parse(cls, value) -> "Slot":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(f"Unknown slot '{value}', expected 'subject' or 'object'") from None


DEFAULT_SLICES = 4


def relation_block_shapes(kind: ModelKind, d: int, m: int = DEFAULT_SLICES) -> Dict[str, Tuple[int, ...]]:
    """
    Per-relation parameter shapes, in storage order.

    Stacked storage prepends an n_relations axis to every shape.
    """
    kind = ModelKind.parse(kind)
    if kind is ModelKind.TRANSE:
        return {"V": (d,)}
    if kind is ModelKind.DISTMULT:
        return {"diag": (d,)}
    if kind is ModelKind.BILINEAR:
        return {"M": (d, d)}
    if kind is ModelKind.BILINEAR_LINEAR:
        return {"T": (d, d), "Q1": (d,), "Q2": (d,)}
    return {"T": (m, d, d), "Q1": (d, m), "Q2": (d, m), "u": (m,)}
