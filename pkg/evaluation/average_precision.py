"""
Type-checked MAP - Average precision with candidates restricted to relation domains.

For a query (s, r, ?) the candidates are the object domain Y_r, for (?, r, o)
the subject domain X_r. Relevant candidates are the entities of the domain
that complete a known triple in any split. Ties place non-relevant
candidates first, then order by entity id.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from kb import RelationDomains, TripleStore
from models import Slot
from .ranking import CandidateScorer

logger = logging.getLogger(__name__)


@dataclass
class MapSummary:
    """MAP over the scored queries; `value` is nan when `queries` is 0."""
    value: float
    queries: int
    skipped: int

    @property
    def empty(self) -> bool:
        return self.queries == 0


def average_precision(scores: np.ndarray, relevant: np.ndarray, ids: Optional[np.ndarray] = None) -> float:
    """
    AP of a ranking by descending score.

    Args:
        scores: Score per candidate
        relevant: Boolean mask per candidate
        ids: Tie-break key per candidate (defaults to position)
    """
    scores = np.asarray(scores, dtype=np.float64)
    relevant = np.asarray(relevant, dtype=bool)
    if not relevant.any():
        return 0.0
    ids = np.arange(len(scores)) if ids is None else np.asarray(ids)
    order = np.lexsort((ids, relevant, -scores))
    hits = relevant[order]
    positions = np.flatnonzero(hits) + 1
    return float(np.mean(np.arange(1, len(positions) + 1) / positions))


def query_average_precision(
    model: CandidateScorer,
    triple,
    slot,
    store: TripleStore,
    domains: RelationDomains
) -> Optional[float]:
    """AP for one query, or None when the true entity lies outside the domain."""
    s, r, o = (int(v) for v in triple)
    slot = Slot.parse(slot)
    if r not in domains:
        return None

    if slot is Slot.OBJECT:
        candidates = domains.object_domain(r)
        target, fixed, known = o, s, store.known_objects(s, r)
    else:
        candidates = domains.subject_domain(r)
        target, fixed, known = s, o, store.known_subjects(r, o)

    if not np.isin(target, candidates):
        return None

    scores = np.asarray(model.score_candidates(fixed, r, slot), dtype=np.float64)[candidates]
    return average_precision(scores, np.isin(candidates, known), candidates)


def map_summary(
    model: CandidateScorer,
    store: TripleStore,
    domains: RelationDomains,
    split: str = "test"
) -> MapSummary:
    """
    MAP over both slots of every triple of `split`, with skipped queries counted.

    A query is skipped when its true entity lies outside the relation
    domain. When every query is skipped (or the split is empty) the result
    has queries=0, value=nan and the skip count.
    """
    values = []
    skipped = 0
    for triple in store.split(split).tolist():
        for slot in (Slot.SUBJECT, Slot.OBJECT):
            ap = query_average_precision(model, triple, slot, store, domains)
            if ap is None:
                skipped += 1
            else:
                values.append(ap)

    if skipped:
        logger.warning(f"MAP: skipped {skipped} quer(ies) whose true entity lies outside the relation domain")
    if not values:
        logger.warning("MAP: no query had its true entity inside the relation domain")
        return MapSummary(float("nan"), 0, skipped)
    return MapSummary(float(np.mean(values)), len(values), skipped)


def map_type_checked(
    model: CandidateScorer,
    store: TripleStore,
    domains: RelationDomains,
    split: str = "test"
) -> float:
    """Mean average precision with type-checked candidates (nan when no query qualifies)."""
    return map_summary(model, store, domains, split).value
