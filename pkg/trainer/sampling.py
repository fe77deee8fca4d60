"""
Negative Sampling - Corrupt one argument of each positive triple.

Replacements are drawn uniformly over all entities and redrawn while the
corrupted triple is a known training fact.
"""

import logging
from typing import Tuple

import numpy as np

from kb import Triple, TripleIndex, TripleStore

logger = logging.getLogger(__name__)

MAX_ATTEMPTS = 100


class SamplingError(RuntimeError):
    """Raised when no fresh corruption is found within the attempt budget."""


def corrupt(
    triples: np.ndarray,
    column: int,
    index: TripleIndex,
    n_entities: int,
    rng: np.random.Generator,
    max_attempts: int = MAX_ATTEMPTS
) -> np.ndarray:
    """
    Replace `column` (0 = subject, 2 = object) of every row with a random entity.

    Returns:
        (n, 3) corrupted triples, none of them contained in `index`

    Raises:
        SamplingError: Some row still collides after max_attempts draws
    """
    negatives = np.array(triples, dtype=np.int64, copy=True).reshape(-1, 3)
    pending = np.arange(len(negatives))

    for _ in range(max_attempts):
        if pending.size == 0:
            break
        negatives[pending, column] = rng.integers(0, n_entities, size=pending.size)
        pending = pending[index.contains_batch(negatives[pending])]

    if pending.size:
        bad = negatives[pending[0]]
        raise SamplingError(
            f"No fresh {'subject' if column == 0 else 'object'} corruption after "
            f"{max_attempts} attempts for {pending.size} triple(s), e.g. relation {int(bad[1])}"
        )
    return negatives


def sample_negatives_batch(
    triples: np.ndarray,
    store: TripleStore,
    rng: np.random.Generator,
    max_attempts: int = MAX_ATTEMPTS
) -> Tuple[np.ndarray, np.ndarray]:
    """Subject-corrupted and object-corrupted negatives for every row, in that draw order."""
    if store.n_entities < 2:
        raise SamplingError("Negative sampling needs at least 2 entities")
    index = store.train_index
    return (
        corrupt(triples, 0, index, store.n_entities, rng, max_attempts),
        corrupt(triples, 2, index, store.n_entities, rng, max_attempts),
    )


def sample_negatives(
    triple,
    store: TripleStore,
    rng: np.random.Generator,
    max_attempts: int = MAX_ATTEMPTS
) -> Tuple[Triple, Triple]:
    """
    Two negatives for one positive: (corrupted subject, corrupted object).

    Raises:
        SamplingError: Fewer than 2 entities, or attempts exhausted
    """
    subject_neg, object_neg = sample_negatives_batch(
        np.asarray(triple, dtype=np.int64), store, rng, max_attempts
    )
    return Triple(*(int(v) for v in subject_neg[0])), Triple(*(int(v) for v in object_neg[0]))
