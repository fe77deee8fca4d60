"""
Relation Composition - Path embeddings and distances between relation embeddings.

Translation vectors compose by addition, diagonal matrices by elementwise
product, full matrices by matrix product in path order.
"""

from typing import Sequence

import numpy as np

from .kinds import ModelKind
from .params import DimensionError, Model


class CapabilityError(TypeError):
    """Raised when a model kind does not support an operation."""


def _require_composable(model: Model) -> None:
    if not model.kind.composable:
        raise CapabilityError(
            f"Relation composition is not defined for {model.kind.value} models "
            f"(supported: transe, distmult, bilinear)"
        )


def _embedding_block(model: Model) -> np.ndarray:
    _require_composable(model)
    if model.kind is ModelKind.TRANSE:
        return model.relations["V"]
    if model.kind is ModelKind.DISTMULT:
        return model.relations["diag"]
    return model.relations["M"]


def relation_embedding(model: Model, relation: int) -> np.ndarray:
    """The vector or matrix representing one relation."""
    return _embedding_block(model)[int(relation)]


def compose_relations(model: Model, sequence: Sequence[int]) -> np.ndarray:
    """
    Embedding of the path p1, ..., pn.

    Raises:
        CapabilityError: Model kind without a composition rule
        ValueError: Empty sequence
    """
    if len(sequence) == 0:
        raise ValueError("Cannot compose an empty relation sequence")
    return compose_batch(model, np.asarray([list(sequence)], dtype=np.int64))[0]


def compose_batch(model: Model, sequences: np.ndarray) -> np.ndarray:
    """
    Compose many equal-length sequences at once.

    Args:
        model: Composable model
        sequences: (k, n) relation ids

    Returns:
        (k, d) for vector embeddings, (k, d, d) for matrices
    """
    block = _embedding_block(model)
    sequences = np.asarray(sequences, dtype=np.int64)
    if sequences.ndim != 2 or sequences.shape[1] == 0:
        raise ValueError(f"Sequences must have shape (k, n) with n >= 1, got {sequences.shape}")

    if model.kind is ModelKind.TRANSE:
        return block[sequences].sum(axis=1)
    if model.kind is ModelKind.DISTMULT:
        return block[sequences].prod(axis=1)

    composed = block[sequences[:, 0]].copy()
    for position in range(1, sequences.shape[1]):
        composed = composed @ block[sequences[:, position]]
    return composed


def relation_distance(a: np.ndarray, b: np.ndarray) -> float:
    """
    Euclidean distance for vectors, Frobenius distance for matrices.

    Raises:
        DimensionError: Shapes differ
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionError(f"Cannot compare embeddings of shapes {a.shape} and {b.shape}")
    return float(np.linalg.norm((a - b).ravel()))


def relation_distances(target: np.ndarray, composed: np.ndarray) -> np.ndarray:
    """Distance from `target` to each embedding along the first axis of `composed`."""
    target = np.asarray(target, dtype=np.float64)
    if composed.shape[1:] != target.shape:
        raise DimensionError(f"Cannot compare embeddings of shapes {target.shape} and {composed.shape[1:]}")
    diff = (composed - target[None]).reshape(len(composed), -1)
    return np.linalg.norm(diff, axis=1)
