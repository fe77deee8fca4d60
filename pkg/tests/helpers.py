"""
Test helpers - small knowledge bases, table-scored models and brute-force oracles.
"""

from itertools import product
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from kb import TripleStore, Vocabulary
from models import Slot


def write_triples(path, rows: Iterable[Tuple[str, str, str]]) -> str:
    """Write token triples as a tab-separated file and return its path."""
    text = "".join(f"{s}\t{r}\t{o}\n" for s, r, o in rows)
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='') as f:
        f.write(text)
    return str(path)


def make_store(
    train: Sequence[Tuple[int, int, int]],
    valid: Sequence[Tuple[int, int, int]] = (),
    test: Sequence[Tuple[int, int, int]] = (),
    n_entities: Optional[int] = None,
    n_relations: Optional[int] = None,
    inverse_of: Optional[Dict[int, int]] = None
) -> TripleStore:
    """TripleStore over id triples with tokens e0.. and r0.."""
    rows = list(train) + list(valid) + list(test)
    n_entities = n_entities or (max(max(s, o) for s, _, o in rows) + 1)
    n_relations = n_relations or (max(r for _, r, _ in rows) + 1)
    vocab = Vocabulary([f"e{i}" for i in range(n_entities)], [f"r{i}" for i in range(n_relations)])
    return TripleStore(vocab=vocab, train=list(train), valid=list(valid), test=list(test),
                       inverse_of=inverse_of or {})


def random_store(
    rng: np.random.Generator,
    n_entities: int = 12,
    n_relations: int = 4,
    n_triples: int = 50,
    test_fraction: float = 0.3
) -> TripleStore:
    """Random distinct triples split into train and test; every relation appears in train."""
    universe = np.array(list(product(range(n_entities), range(n_relations), range(n_entities))))
    picked = universe[rng.choice(len(universe), size=n_triples, replace=False)]
    n_test = int(n_triples * test_fraction)
    train, test = picked[n_test:], picked[:n_test]
    # guarantee every relation and entity id is valid for the vocabulary
    return make_store([tuple(t) for t in train.tolist()], test=[tuple(t) for t in test.tolist()],
                      n_entities=n_entities, n_relations=n_relations)


class TableModel:
    """Scores read from a fixed (n_relations, n_entities, n_entities) table."""

    def __init__(self, table: np.ndarray):
        self.table = np.asarray(table, dtype=np.float64)

    def score_candidates(self, entity: int, relation: int, slot) -> np.ndarray:
        if Slot.parse(slot) is Slot.OBJECT:
            return self.table[relation, entity, :]
        return self.table[relation, :, entity]


def oracle_model(store: TripleStore) -> TableModel:
    """Scores 1 for known triples, 0 otherwise."""
    table = np.zeros((store.n_relations, store.n_entities, store.n_entities))
    for s, r, o in store.all_triples.tolist():
        table[r, s, o] = 1.0
    return TableModel(table)


def brute_force_ranks(model: TableModel, store: TripleStore, triple, slot: Slot) -> Tuple[int, int]:
    """(raw, filtered) ranks by direct enumeration of every candidate."""
    s, r, o = triple
    known = {tuple(t) for t in store.all_triples.tolist()}
    true_score = model.table[r, s, o]
    raw = filtered = 1
    for e in range(store.n_entities):
        candidate = (s, r, e) if slot is Slot.OBJECT else (e, r, o)
        if candidate == (s, r, o):
            continue
        if model.table[candidate[1], candidate[0], candidate[2]] >= true_score:
            raw += 1
            if candidate not in known:
                filtered += 1
    return raw, filtered


def brute_force_ap(ranked_relevance: List[bool]) -> float:
    """Average precision of a ranked relevance list."""
    hits, total = 0, 0.0
    for position, relevant in enumerate(ranked_relevance, 1):
        if relevant:
            hits += 1
            total += hits / position
    return total / hits if hits else 0.0


def brute_force_map(model: TableModel, store: TripleStore) -> float:
    """Type-checked MAP by sorting candidates with explicit tie rules."""
    train = [tuple(t) for t in store.train.tolist()]
    known = {tuple(t) for t in store.all_triples.tolist()}
    values = []
    for s, r, o in store.test.tolist():
        subjects = sorted({a for a, rel, _ in train if rel == r})
        objects = sorted({b for _, rel, b in train if rel == r})
        for slot in (Slot.SUBJECT, Slot.OBJECT):
            if slot is Slot.OBJECT:
                candidates, target = objects, o
                score = {e: model.table[r, s, e] for e in candidates}
                relevant = {e: (s, r, e) in known for e in candidates}
            else:
                candidates, target = subjects, s
                score = {e: model.table[r, e, o] for e in candidates}
                relevant = {e: (e, r, o) in known for e in candidates}
            if target not in candidates:
                continue
            ordered = sorted(candidates, key=lambda e: (-score[e], relevant[e], e))
            values.append(brute_force_ap([relevant[e] for e in ordered]))
    return float(np.mean(values)) if values else float("nan")


def brute_force_join(train: Sequence[Tuple[int, int, int]], head: int, body: Sequence[int]) -> set:
    """Rule predictions by nested loops over the training triples."""
    edges = [[(s, o) for s, r, o in train if r == b] for b in body]
    predictions = set()
    if len(body) == 2:
        for a, b in edges[0]:
            for b2, c in edges[1]:
                if b == b2:
                    predictions.add((a, head, c))
    else:
        for a, b in edges[0]:
            for b2, c in edges[1]:
                if b != b2:
                    continue
                for c2, d in edges[2]:
                    if c == c2:
                        predictions.add((a, head, d))
    return predictions


def layered_blocks(first_entity: int, group_size: int) -> Tuple[range, range, range]:
    """Three consecutive id ranges A, B, C of one entity group."""
    a = range(first_entity, first_entity + group_size)
    b = range(a.stop, a.stop + group_size)
    c = range(b.stop, b.stop + group_size)
    return a, b, c


def block_composition(layers, b1: int, b2: int, head: int) -> Tuple[set, set]:
    """
    Dense A -> B and B -> C edges plus their composition A -> C.

    Every a reaches every c, so the head facts are exactly the
    composed body paths. Returns (body triples, head triples).
    """
    a_ids, b_ids, c_ids = layers
    body = {(a, b1, b) for a in a_ids for b in b_ids}
    body |= {(b, b2, c) for b in b_ids for c in c_ids}
    head_triples = {(a, head, c) for a in a_ids for c in c_ids}
    return body, head_triples


def composition_kb(
    rng: np.random.Generator,
    n_groups: int = 10,
    group_size: int = 10,
    holdout: float = 0.1
) -> Tuple[List[Tuple[int, int, int]], List[Tuple[int, int, int]]]:
    """
    Three relations with r2 = r0 followed by r1.

    Entities form n_groups groups of three layers; r0 links layer A to B,
    r1 links B to C and r2 holds every composed A to C pair. The defaults
    give 300 entities and 3,000 triples. A fraction of r2 is held out.
    """
    train, composed = set(), set()
    for g in range(n_groups):
        body, head_triples = block_composition(layered_blocks(3 * group_size * g, group_size), 0, 1, 2)
        train |= body
        composed |= head_triples
    composed = sorted(composed)
    order = rng.permutation(len(composed))
    n_test = max(1, int(len(composed) * holdout))
    test = {composed[i] for i in order[:n_test].tolist()}
    train |= set(composed) - test
    return sorted(train), sorted(test)


def planted_rules_kb(
    rng: np.random.Generator,
    n_rules: int = 5,
    n_distractors: int = 20,
    group_size: int = 10,
    n_edges: int = 50
) -> Tuple[List[Tuple[int, int, int]], List[Tuple[int, int, int]]]:
    """
    Planted length-2 rules among random distractor relations.

    Rule i owns entity group i and relations 3i (first body atom),
    3i + 1 (second) and 3i + 2 (head); head facts are exactly the composed
    body paths. Distractors get n_edges random edges over all entities.
    Returns (triples, planted (b1, b2, head) tuples).
    """
    triples = set()
    planted = []
    for i in range(n_rules):
        b1, b2, head = 3 * i, 3 * i + 1, 3 * i + 2
        body, head_triples = block_composition(layered_blocks(3 * group_size * i, group_size), b1, b2, head)
        triples |= body | head_triples
        planted.append((b1, b2, head))

    n_entities = 3 * group_size * n_rules
    first = 3 * n_rules
    for r in range(first, first + n_distractors):
        s = rng.integers(0, n_entities, size=n_edges)
        o = rng.integers(0, n_entities, size=n_edges)
        triples.update((int(a), r, int(b)) for a, b in zip(s, o))
    return sorted(triples), planted
