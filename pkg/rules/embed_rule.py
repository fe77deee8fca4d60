"""
EmbedRule - Mine closed-path Horn rules from relation embeddings.

For every head relation, candidate body sequences are ranked by the distance
between the head embedding and the composed body embedding. The K nearest
are kept, a global distance threshold is applied, then the gap cutoff keeps
the prefix before the largest jump in distance. Survivors are scored by
confidence on the training split and returned by decreasing confidence.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Union

import numpy as np

from kb import RelationDomains, TripleStore
from models import (
    CapabilityError,
    Model,
    ModelKind,
    Projection,
    compose_batch,
    relation_distances,
    relation_embedding,
)
from .instantiate import prediction_counts
from .sequences import RelationSequence, enumerate_sequences

logger = logging.getLogger(__name__)

DEFAULT_K = 100

# distance thresholds by preset name and rule length
DELTA_PRESETS: Dict[str, Dict[int, float]] = {
    "distmult-tanh-ev": {2: 9.2, 3: 9.1},
    "distmult": {2: 36.3, 3: 48.8},
    "bilinear": {2: 1.9, 3: 2.9},
    "transe": {2: 3.4, 3: 1.1},
}


class EmptyInputError(ValueError):
    """Raised when an operation needs at least one element."""


@dataclass
class RuleCandidate:
    head: int
    body: RelationSequence
    distance: float
    support: int = 0
    n_predictions: int = 0
    confidence: float = 0.0
    predictions: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    @property
    def length(self) -> int:
        return len(self.body)

    def to_dict(self) -> Dict:
        return {
            "head": self.head,
            "body": list(self.body),
            "distance": self.distance,
            "support": self.support,
            "n_predictions": self.n_predictions,
            "confidence": self.confidence,
        }


def delta_preset_name(model: Model) -> str:
    if model.kind is ModelKind.DISTMULT and model.projection is Projection.TANH:
        return "distmult-tanh-ev"
    return model.kind.value


def default_delta(model: Model, length: int) -> float:
    """Distance threshold preset for the model kind, projection and rule length."""
    name = delta_preset_name(model)
    if name not in DELTA_PRESETS:
        raise CapabilityError(f"No rule threshold preset for {model.kind.value} models")
    return DELTA_PRESETS[name][length]


def gap_cutoff(distances: Sequence[float]) -> int:
    """
    Number of leading elements to keep: j maximizing d[j+1] - d[j] (1-based).

    A single element gives 1; equal gaps resolve to the smallest j.

    Raises:
        EmptyInputError: Empty list
    """
    d = np.asarray(distances, dtype=np.float64)
    if d.size == 0:
        raise EmptyInputError("gap_cutoff needs at least one distance")
    if d.size == 1:
        return 1
    return int(np.argmax(np.diff(d))) + 1


def rank_sequences(
    model: Model,
    head: int,
    sequences: List[RelationSequence],
    k: int
) -> List[RuleCandidate]:
    """The k sequences whose composition lies nearest the head embedding, ascending."""
    if not sequences:
        return []
    composed = compose_batch(model, np.asarray(sequences, dtype=np.int64))
    distances = relation_distances(relation_embedding(model, head), composed)
    order = np.argsort(distances, kind="stable")[:k]
    return [RuleCandidate(head, sequences[i], float(distances[i])) for i in order]


def _resolve_delta(model: Model, delta: Union[None, float, Mapping[int, float]], length: int) -> float:
    if delta is None:
        return default_delta(model, length)
    if isinstance(delta, Mapping):
        return float(delta[length]) if length in delta else default_delta(model, length)
    return float(delta)


def mine_head(
    model: Model,
    store: TripleStore,
    domains: RelationDomains,
    head: int,
    k: int = DEFAULT_K,
    delta: Union[None, float, Mapping[int, float]] = None,
    lengths: Iterable[int] = (2,)
) -> List[RuleCandidate]:
    """Rules for one head relation, before the global confidence sort."""
    rules: List[RuleCandidate] = []
    for length in lengths:
        threshold = _resolve_delta(model, delta, length)
        nearest = rank_sequences(model, head, enumerate_sequences(domains, head, length), k)
        kept = [c for c in nearest if c.distance <= threshold]
        if not kept:
            continue
        kept = kept[:gap_cutoff([c.distance for c in kept])]

        for candidate in kept:
            predictions, correct = prediction_counts(head, candidate.body, store)
            if len(predictions) == 0:
                logger.debug(f"Dropping {candidate.body} => {head}: no predictions on train")
                continue
            candidate.predictions = predictions
            candidate.n_predictions = len(predictions)
            candidate.support = correct
            candidate.confidence = correct / len(predictions)
            rules.append(candidate)
    return rules


def embed_rule(
    model: Model,
    store: TripleStore,
    domains: RelationDomains,
    k: int = DEFAULT_K,
    delta: Union[None, float, Mapping[int, float]] = None,
    lengths: Iterable[int] = (2,),
    heads: Optional[Iterable[int]] = None,
    workers: int = 1
) -> List[RuleCandidate]:
    """
    Mine rules for every head relation in `domains`.

    Args:
        model: Composable model (TransE, DistMult or Bilinear)
        store: Triple store (training split used for confidence)
        domains: Relation domains, typically pruned
        k: Nearest sequences kept per head and length
        delta: Distance threshold, per-length mapping, or None for presets
        lengths: Body lengths to search (2 and/or 3)
        heads: Restrict to these head relations
        workers: Threads used across heads; results merged by head id

    Returns:
        Rules sorted by decreasing confidence (ties: distance, head, body)

    Raises:
        CapabilityError: Model kind without a composition rule
    """
    if not model.kind.composable:
        raise CapabilityError(f"Rule mining needs a composable model, got {model.kind.value}")
    if k < 1:
        raise ValueError(f"K must be >= 1, got {k}")
    if delta is not None and not isinstance(delta, Mapping) and delta < 0:
        raise ValueError(f"delta must be >= 0, got {delta}")
    lengths = list(lengths)
    heads = sorted(domains.relations if heads is None else set(heads) & set(domains.relations))

    def search(head: int) -> List[RuleCandidate]:
        return mine_head(model, store, domains, head, k, delta, lengths)

    if workers <= 1:
        per_head = [search(h) for h in heads]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_head = list(pool.map(search, heads))

    rules = [rule for found in per_head for rule in found]
    rules.sort(key=lambda c: (-c.confidence, c.distance, c.head, c.body))
    logger.info(f"EmbedRule: {len(rules)} rule(s) over {len(heads)} head relation(s), lengths {lengths}")
    return rules
