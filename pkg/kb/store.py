"""
Triple Store - Integer-indexed facts with train/valid/test splits.

Triples are held as read-only (n, 3) int64 arrays (subject, relation, object).
Membership lookups go through TripleIndex, which encodes every triple as a
single int64 key and answers batch queries with a binary search.
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Dict, List, Mapping, NamedTuple, Optional, Tuple

import numpy as np

from tools.file_tools import atomic_write_text
from .vocabulary import Vocabulary

logger = logging.getLogger(__name__)

SPLITS = ("train", "valid", "test")
INVERSE_SUFFIX = "^-1"


class TripleParseError(ValueError):
    """Raised for a line that is not exactly subject<TAB>relation<TAB>object."""

    def __init__(self, path: str, line_number: int, line: str):
        self.path = path
        self.line_number = line_number
        super().__init__(
            f"{path}:{line_number}: expected 3 tab-separated fields, "
            f"got {len(line.split(chr(9)))}: {line[:80]!r}"
        )


class DuplicateTripleError(ValueError):
    """Raised when a split would contain the same triple twice."""


class EmptyStoreError(ValueError):
    """Raised when an operation needs triples and none are left."""


class Triple(NamedTuple):
    subject: int
    relation: int
    object: int


def empty_triples() -> np.ndarray:
    return np.zeros((0, 3), dtype=np.int64)


def as_triple_array(triples) -> np.ndarray:
    """Coerce a sequence of triples into a read-only (n, 3) int64 array."""
    arr = np.asarray(triples, dtype=np.int64)
    if arr.size == 0:
        arr = empty_triples()
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ValueError(f"Triples must have shape (n, 3), got {arr.shape}")
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


class TripleIndex:
    """
    Sorted int64 keys for fast membership tests.
    key = (subject * n_relations + relation) * n_entities + object
    """

    def __init__(self, triples: np.ndarray, n_entities: int, n_relations: int):
        self.n_entities = max(int(n_entities), 1)
        self.n_relations = max(int(n_relations), 1)
        self.keys = np.unique(self.encode(triples))

    def encode(self, triples: np.ndarray) -> np.ndarray:
        arr = np.asarray(triples, dtype=np.int64).reshape(-1, 3)
        return (arr[:, 0] * self.n_relations + arr[:, 1]) * self.n_entities + arr[:, 2]

    def contains_batch(self, triples: np.ndarray) -> np.ndarray:
        """Boolean mask, one entry per row of `triples`."""
        keys = self.encode(triples)
        if self.keys.size == 0:
            return np.zeros(keys.shape, dtype=bool)
        pos = np.searchsorted(self.keys, keys)
        pos = np.minimum(pos, self.keys.size - 1)
        return self.keys[pos] == keys

    def contains(self, triple) -> bool:
        return bool(self.contains_batch(np.asarray(triple, dtype=np.int64))[0])

    def __len__(self) -> int:
        return int(self.keys.size)


@dataclass(frozen=True, eq=False)
class TripleStore:
    """
    Immutable container for the three splits and their shared vocabulary.
    """
    vocab: Vocabulary
    train: np.ndarray = field(default_factory=empty_triples)
    valid: np.ndarray = field(default_factory=empty_triples)
    test: np.ndarray = field(default_factory=empty_triples)
    # relation id -> id of its inverse, in both directions
    inverse_of: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        for name in SPLITS:
            arr = as_triple_array(getattr(self, name))
            object.__setattr__(self, name, arr)
            if arr.size and (arr[:, [0, 2]].max() >= self.vocab.n_entities
                             or arr[:, 1].max() >= self.vocab.n_relations
                             or arr.min() < 0):
                raise ValueError(f"Split '{name}' holds ids outside the vocabulary bounds")
        object.__setattr__(self, "inverse_of", dict(self.inverse_of))

    @property
    def n_entities(self) -> int:
        return self.vocab.n_entities

    @property
    def n_relations(self) -> int:
        return self.vocab.n_relations

    def split(self, name: str) -> np.ndarray:
        if name not in SPLITS:
            raise ValueError(f"Unknown split '{name}', expected one of {SPLITS}")
        return getattr(self, name)

    def triples(self, name: str) -> List[Triple]:
        return [Triple(int(s), int(r), int(o)) for s, r, o in self.split(name)]

    @cached_property
    def all_triples(self) -> np.ndarray:
        return np.concatenate([self.train, self.valid, self.test], axis=0)

    @cached_property
    def train_index(self) -> TripleIndex:
        return TripleIndex(self.train, self.n_entities, self.n_relations)

    @cached_property
    def seen_index(self) -> TripleIndex:
        """Membership over train and valid (what counts as already seen)."""
        return TripleIndex(np.concatenate([self.train, self.valid]), self.n_entities, self.n_relations)

    @cached_property
    def test_index(self) -> TripleIndex:
        return TripleIndex(self.test, self.n_entities, self.n_relations)

    @cached_property
    def known_index(self) -> TripleIndex:
        """Membership over the union of all splits."""
        return TripleIndex(self.all_triples, self.n_entities, self.n_relations)

    def contains(self, triple) -> bool:
        return self.known_index.contains(triple)

    @cached_property
    def _known_objects(self) -> Dict[Tuple[int, int], np.ndarray]:
        return _group_column(self.all_triples, key_cols=(0, 1), value_col=2)

    @cached_property
    def _known_subjects(self) -> Dict[Tuple[int, int], np.ndarray]:
        return _group_column(self.all_triples, key_cols=(1, 2), value_col=0)

    def known_objects(self, subject: int, relation: int) -> np.ndarray:
        """Every o with (subject, relation, o) in any split."""
        return self._known_objects.get((int(subject), int(relation)), _EMPTY_IDS)

    def known_subjects(self, relation: int, obj: int) -> np.ndarray:
        """Every s with (s, relation, obj) in any split."""
        return self._known_subjects.get((int(relation), int(obj)), _EMPTY_IDS)

    def relation_counts(self, name: str = "train") -> np.ndarray:
        return np.bincount(self.split(name)[:, 1], minlength=self.n_relations)

    def stats(self) -> Dict[str, int]:
        """Counts reported by `prepare` and recorded in manifests."""
        return {
            "entities": self.n_entities,
            "relations": self.n_relations,
            "train": int(len(self.train)),
            "valid": int(len(self.valid)),
            "test": int(len(self.test)),
            "total": int(len(self.all_triples)),
            "inverse_pairs": len(self.inverse_of) // 2,
        }

    def leakage(self) -> Dict[str, int]:
        """Number of valid/test triples also present in train."""
        return {
            name: int(self.train_index.contains_batch(self.split(name)).sum())
            for name in ("valid", "test")
        }


_EMPTY_IDS = np.zeros(0, dtype=np.int64)
_EMPTY_IDS.setflags(write=False)


def _group_column(triples: np.ndarray, key_cols: Tuple[int, int], value_col: int) -> Dict[Tuple[int, int], np.ndarray]:
    groups: Dict[Tuple[int, int], List[int]] = {}
    a, b = key_cols
    for row in triples.tolist():
        groups.setdefault((row[a], row[b]), []).append(row[value_col])
    return {key: np.unique(np.asarray(values, dtype=np.int64)) for key, values in groups.items()}


def load_triples(
    path: str,
    vocab: Optional[Vocabulary] = None,
    extend_vocab: bool = False,
    on_duplicate: str = "skip"
) -> Tuple[np.ndarray, Vocabulary]:
    """
    Parse a triple file into dense ids.

    Repeated lines within one file are dropped by default: the first
    occurrence is kept and a single warning reports how many were
    rejected. Pass on_duplicate="error" to fail on the first repeat.

    Args:
        path: UTF-8 file, one "subject<TAB>relation<TAB>object" per line
        vocab: Existing vocabulary. Unknown tokens are an error unless
            extend_vocab is set; when omitted a new vocabulary is built in
            first-appearance order
        extend_vocab: Grow the supplied vocabulary instead of rejecting tokens
        on_duplicate: "skip" drops repeated lines with a warning, "error" raises

    Returns:
        (triples, vocab): (n, 3) int64 array and the vocabulary used

    Raises:
        TripleParseError: Line without exactly 3 fields
        UnknownTokenError: Token outside a fixed vocabulary
        DuplicateTripleError: Repeated line when on_duplicate="error"
    """
    if vocab is None:
        vocab = Vocabulary()
        extend_vocab = True

    entity = vocab.add_entity if extend_vocab else vocab.entity_id
    relation = vocab.add_relation if extend_vocab else vocab.relation_id

    rows: List[Tuple[int, int, int]] = []
    seen = set()
    duplicates = 0

    with open(path, 'r', encoding='utf-8', newline='') as f:
        for line_number, raw in enumerate(f, 1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise TripleParseError(str(path), line_number, line)
            s_name, r_name, o_name = fields
            triple = (entity(s_name), relation(r_name), entity(o_name))
            if triple in seen:
                if on_duplicate == "error":
                    raise DuplicateTripleError(f"{path}:{line_number}: duplicate triple {line!r}")
                duplicates += 1
                continue
            seen.add(triple)
            rows.append(triple)

    if duplicates:
        logger.warning(f"{path}: rejected {duplicates} duplicate triple(s) within split")

    return as_triple_array(rows), vocab


def load_dataset(
    train_path: str,
    valid_path: Optional[str] = None,
    test_path: Optional[str] = None,
    vocab: Optional[Vocabulary] = None
) -> TripleStore:
    """
    Load the three splits with one vocabulary built in train, valid, test order.

    Args:
        train_path: Training triples
        valid_path: Optional validation triples
        test_path: Optional test triples
        vocab: Fixed vocabulary to map onto (no new tokens accepted)

    Returns:
        TripleStore
    """
    extend = vocab is None
    vocab = vocab if vocab is not None else Vocabulary()

    splits = {}
    for name, path in zip(SPLITS, (train_path, valid_path, test_path)):
        if path is None:
            splits[name] = empty_triples()
            continue
        splits[name], _ = load_triples(path, vocab, extend_vocab=extend)

    store = TripleStore(vocab=vocab, **splits)
    leaked = store.leakage()
    for name, count in leaked.items():
        if count:
            logger.warning(f"{count} {name} triple(s) also appear in train")

    logger.info(
        f"Loaded {len(store.all_triples)} triples "
        f"({store.n_entities} entities, {store.n_relations} relations)"
    )
    return store


def save_triples(path: str, triples: np.ndarray, vocab: Vocabulary) -> Path:
    """Write triples back to the tab-separated token format."""
    lines = [
        f"{vocab.entity_name(s)}\t{vocab.relation_name(r)}\t{vocab.entity_name(o)}\n"
        for s, r, o in np.asarray(triples).tolist()
    ]
    return atomic_write_text(path, "".join(lines))


def filter_frequent_relations(store: TripleStore, min_count: int) -> TripleStore:
    """
    Keep only relations with at least `min_count` training triples.

    Triples of every split are filtered by relation and the vocabulary is
    re-compacted, keeping the relative order of surviving tokens.

    Counts come from train only. A relation that appears only in valid or
    test has count 0 and is dropped for every min_count, together with its
    held-out triples; min_count=1 is therefore the identity only when every
    relation has training triples.

    Raises:
        ValueError: min_count < 1
        EmptyStoreError: Nothing survives
    """
    if min_count < 1:
        raise ValueError(f"min_count must be >= 1, got {min_count}")

    keep_relation = store.relation_counts("train") >= min_count
    splits = {name: store.split(name)[keep_relation[store.split(name)[:, 1]]] for name in SPLITS}

    if len(splits["train"]) == 0:
        raise EmptyStoreError(f"No relation has at least {min_count} training triples")

    kept = np.concatenate([splits[name] for name in SPLITS])
    keep_entity = np.zeros(store.n_entities, dtype=bool)
    keep_entity[kept[:, 0]] = True
    keep_entity[kept[:, 2]] = True

    entity_map = np.cumsum(keep_entity) - 1
    relation_map = np.cumsum(keep_relation) - 1

    vocab = Vocabulary(
        [n for n, k in zip(store.vocab.entity_names, keep_entity) if k],
        [n for n, k in zip(store.vocab.relation_names, keep_relation) if k]
    )

    remapped = {
        name: np.stack([entity_map[arr[:, 0]], relation_map[arr[:, 1]], entity_map[arr[:, 2]]], axis=1)
        if len(arr) else empty_triples()
        for name, arr in splits.items()
    }
    inverse_of = {
        int(relation_map[a]): int(relation_map[b])
        for a, b in store.inverse_of.items()
        if keep_relation[a] and keep_relation[b]
    }

    held_out = np.unique(np.concatenate([store.split("valid")[:, 1], store.split("test")[:, 1]]))
    train_counts = store.relation_counts("train")
    held_out_only = [store.vocab.relation_names[r] for r in held_out.tolist() if train_counts[r] == 0]
    if held_out_only:
        logger.warning(f"Relation filter: {len(held_out_only)} relation(s) without training triples "
                       f"dropped with their held-out triples: {held_out_only}")

    dropped = int((~keep_relation).sum())
    logger.info(f"Relation filter (min_count={min_count}): dropped {dropped} relation(s), "
                f"{store.n_entities - vocab.n_entities} entity(ies)")
    return TripleStore(vocab=vocab, inverse_of=inverse_of, **remapped)


def augment_inverses(store: TripleStore) -> TripleStore:
    """
    Add r^-1 for every relation r that has no inverse yet.

    The inverse relation receives every training triple of r reversed;
    valid and test splits are untouched. Relations that already have a
    pairing are skipped, so the operation is idempotent.
    """
    vocab = store.vocab.copy()
    inverse_of = dict(store.inverse_of)
    extra = [store.train]

    for relation in range(store.n_relations):
        if relation in inverse_of:
            continue
        name = store.vocab.relation_name(relation) + INVERSE_SUFFIX
        if vocab.has_relation(name):
            raise ValueError(f"Relation '{name}' already exists but is not paired with its base relation")
        inverse = vocab.add_relation(name)
        inverse_of[relation] = inverse
        inverse_of[inverse] = relation

        forward = store.train[store.train[:, 1] == relation]
        if len(forward):
            extra.append(np.stack([forward[:, 2], np.full(len(forward), inverse), forward[:, 0]], axis=1))

    added = vocab.n_relations - store.n_relations
    if added == 0:
        return store

    logger.info(f"Added {added} inverse relation(s)")
    return TripleStore(
        vocab=vocab,
        train=np.concatenate(extra, axis=0),
        valid=store.valid,
        test=store.test,
        inverse_of=inverse_of
    )
