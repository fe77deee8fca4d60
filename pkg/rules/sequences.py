"""
Body Sequences - Type-consistent relation paths for a head relation.

A sequence p1, ..., pn is proposed for head r when X_p1 meets X_r, Y_pn meets
Y_r and Y_pi meets X_p(i+1) for every consecutive pair. Relations are pairwise
distinct and differ from r; consecutive mutual inverses are never chained.
Domain overlaps come from incidence-matrix products computed once per
RelationDomains.
"""

import logging
from typing import Iterable, List, Optional, Tuple

import numpy as np

from kb import RelationDomains

logger = logging.getLogger(__name__)

RelationSequence = Tuple[int, ...]
SUPPORTED_LENGTHS = (2, 3)


def prune_relations(
    domains: RelationDomains,
    exclude: Optional[Iterable[int]] = None,
    drop_singleton_domains: bool = False
) -> RelationDomains:
    """
    Remove relations from rule search.

    Args:
        domains: Relation domains
        exclude: Relation ids to drop (e.g. equivalence-like relations)
        drop_singleton_domains: Also drop relations whose subject or object
            domain holds a single entity

    Returns:
        Restricted RelationDomains (relation ids unchanged)
    """
    excluded = set(int(r) for r in (exclude or []))
    keep = []
    singleton = 0
    for relation in domains.relations:
        if relation in excluded:
            continue
        if drop_singleton_domains and (
            len(domains.subject_domain(relation)) == 1 or len(domains.object_domain(relation)) == 1
        ):
            singleton += 1
            continue
        keep.append(relation)

    logger.info(
        f"Rule search over {len(keep)} relation(s) "
        f"({len(excluded & set(domains.relations))} excluded, {singleton} with singleton domain)"
    )
    return domains.restrict(keep)


def _inverse_pairs(domains: RelationDomains, relations: List[int]) -> np.ndarray:
    """[i, j] is True when relations[j] is the inverse of relations[i]."""
    position = {r: i for i, r in enumerate(relations)}
    pairs = np.zeros((len(relations), len(relations)), dtype=bool)
    for a, b in domains.inverse_of.items():
        if a in position and b in position:
            pairs[position[a], position[b]] = True
    return pairs


def enumerate_sequences(domains: RelationDomains, head: int, length: int) -> List[RelationSequence]:
    """
    All type-consistent body sequences of `length` for `head`, in lexicographic order.

    Args:
        domains: Relation domains (possibly pruned)
        head: Head relation id
        length: 2 or 3

    Returns:
        List of relation id tuples; empty when the head is not in `domains`
    """
    if length not in SUPPORTED_LENGTHS:
        raise ValueError(f"Rule length must be one of {SUPPORTED_LENGTHS}, got {length}")
    if head not in domains:
        return []

    relations = domains.relations
    ids = np.asarray(relations, dtype=np.int64)
    h = relations.index(head)

    chain = domains.chain_overlap & ~_inverse_pairs(domains, relations)
    np.fill_diagonal(chain, False)
    not_head = np.ones(len(relations), dtype=bool)
    not_head[h] = False

    first_ok = domains.subject_overlap[h] & not_head
    last_ok = domains.object_overlap[:, h] & not_head

    sequences: List[RelationSequence] = []
    for p1 in np.flatnonzero(first_ok):
        if length == 2:
            for p2 in np.flatnonzero(chain[p1] & last_ok):
                sequences.append((int(ids[p1]), int(ids[p2])))
            continue
        for p2 in np.flatnonzero(chain[p1] & not_head):
            third = chain[p2] & last_ok
            third[p1] = False
            for p3 in np.flatnonzero(third):
                sequences.append((int(ids[p1]), int(ids[p2]), int(ids[p3])))

    return sequences


def is_type_consistent(domains: RelationDomains, head: int, body: RelationSequence) -> bool:
    """Re-check every constraint on one (head, body) pair directly from the domains."""
    if len(set(body)) != len(body) or head in body:
        return False
    if any(r not in domains for r in (head,) + tuple(body)):
        return False

    def meets(a: np.ndarray, b: np.ndarray) -> bool:
        return np.intersect1d(a, b).size > 0

    if not meets(domains.subject_domain(body[0]), domains.subject_domain(head)):
        return False
    if not meets(domains.object_domain(body[-1]), domains.object_domain(head)):
        return False
    for a, b in zip(body, body[1:]):
        if domains.inverse_of.get(a) == b:
            return False
        if not meets(domains.object_domain(a), domains.subject_domain(b)):
            return False
    return True


def count_sequences(domains: RelationDomains, length: int, heads: Optional[Iterable[int]] = None) -> int:
    """Total number of candidate sequences summed over heads."""
    heads = domains.relations if heads is None else heads
    return sum(len(enumerate_sequences(domains, h, length)) for h in heads)
