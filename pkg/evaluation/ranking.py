"""
Ranking - Raw and filtered ranks of the true entity for held-out triples.

Ties are pessimistic: every other candidate with an equal score is ranked
ahead of the true entity.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Protocol

import numpy as np

from kb import Triple, TripleStore
from models import Slot

logger = logging.getLogger(__name__)

RAW = "raw"
FILTERED = "filtered"
MODES = (RAW, FILTERED)


class CandidateScorer(Protocol):
    """Anything that scores every entity for one slot of a (entity, relation) query."""

    def score_candidates(self, entity: int, relation: int, slot) -> np.ndarray:
        ...


def check_mode(mode: str) -> str:
    if mode not in MODES:
        raise ValueError(f"Unknown ranking mode '{mode}', expected one of {MODES}")
    return mode


@dataclass(frozen=True)
class RankResult:
    triple: Triple
    slot: Slot
    raw_rank: int
    filtered_rank: int
    mode: str = FILTERED

    @property
    def rank(self) -> int:
        return self.raw_rank if self.mode == RAW else self.filtered_rank

    def in_mode(self, mode: str) -> int:
        return self.raw_rank if check_mode(mode) == RAW else self.filtered_rank


def pessimistic_rank(scores: np.ndarray, target: int, exclude: Optional[np.ndarray] = None) -> int:
    """
    1 + #candidates scoring higher + #other candidates scoring equal.

    Args:
        scores: Score per candidate
        target: Index of the true candidate
        exclude: Candidate ids to ignore (never the target)
    """
    true_score = scores[target]
    ahead = scores >= true_score
    ahead[target] = False
    if exclude is not None and len(exclude):
        ahead[exclude] = False
    return 1 + int(np.count_nonzero(ahead))


def rank_entity(
    model: CandidateScorer,
    triple,
    slot,
    store: TripleStore,
    mode: str = FILTERED
) -> RankResult:
    """
    Rank the true entity of `triple` among all entities substituted into `slot`.

    Both ranks are computed; `mode` selects RankResult.rank. Filtering
    removes candidates that form a triple known in any split.

    Args:
        model: Model or any object with score_candidates
        triple: (subject, relation, object)
        slot: "subject" or "object"
        store: Triple store providing the known triples
        mode: "raw" or "filtered"
    """
    s, r, o = (int(v) for v in triple)
    slot = Slot.parse(slot)
    check_mode(mode)

    if slot is Slot.OBJECT:
        scores = np.asarray(model.score_candidates(s, r, slot), dtype=np.float64)
        target, known = o, store.known_objects(s, r)
    else:
        scores = np.asarray(model.score_candidates(o, r, slot), dtype=np.float64)
        target, known = s, store.known_subjects(r, o)

    raw = pessimistic_rank(scores, target)
    filtered = pessimistic_rank(scores, target, known[known != target])
    return RankResult(Triple(s, r, o), slot, raw, filtered, mode)


def _rank_chunk(model: CandidateScorer, store: TripleStore, triples: np.ndarray) -> List[RankResult]:
    results = []
    for triple in triples.tolist():
        results.append(rank_entity(model, triple, Slot.SUBJECT, store))
        results.append(rank_entity(model, triple, Slot.OBJECT, store))
    return results


def rank_triples(
    model: CandidateScorer,
    store: TripleStore,
    triples: np.ndarray,
    workers: int = 1,
    chunk_size: int = 256
) -> List[RankResult]:
    """
    Subject and object RankResults for every triple, in input order.

    Args:
        workers: Threads used; chunks are merged in input order either way
    """
    triples = np.asarray(triples, dtype=np.int64).reshape(-1, 3)
    chunks = [triples[i:i + chunk_size] for i in range(0, len(triples), chunk_size)]

    if workers <= 1 or len(chunks) <= 1:
        parts = [_rank_chunk(model, store, chunk) for chunk in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda chunk: _rank_chunk(model, store, chunk), chunks))

    return [result for part in parts for result in part]
