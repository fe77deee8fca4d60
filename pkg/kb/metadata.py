"""
Relation Metadata - Argument domains and cardinality categories.

Both are computed from the training split only.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Dict, List, Mapping

import numpy as np
import pandas as pd

from .store import EmptyStoreError, TripleStore

logger = logging.getLogger(__name__)

DEFAULT_CATEGORY_THRESHOLD = 1.5


class RelationCategory(str, Enum):
    ONE_TO_ONE = "1-to-1"
    ONE_TO_MANY = "1-to-n"
    MANY_TO_ONE = "n-to-1"
    MANY_TO_MANY = "n-to-n"


@dataclass(frozen=True, eq=False)
class RelationDomains:
    """
    Subject domain X_r and object domain Y_r per relation.

    Sets are stored as sorted int64 id arrays. Relations without training
    triples are absent.
    """
    n_entities: int
    subjects: Mapping[int, np.ndarray]
    objects: Mapping[int, np.ndarray]
    inverse_of: Mapping[int, int] = field(default_factory=dict)

    @property
    def relations(self) -> List[int]:
        return sorted(self.subjects)

    def __contains__(self, relation: int) -> bool:
        return relation in self.subjects

    def subject_domain(self, relation: int) -> np.ndarray:
        return self.subjects[relation]

    def object_domain(self, relation: int) -> np.ndarray:
        return self.objects[relation]

    def subject_mask(self, relation: int) -> np.ndarray:
        mask = np.zeros(self.n_entities, dtype=bool)
        mask[self.subjects[relation]] = True
        return mask

    def object_mask(self, relation: int) -> np.ndarray:
        mask = np.zeros(self.n_entities, dtype=bool)
        mask[self.objects[relation]] = True
        return mask

    @cached_property
    def _incidence(self):
        relations = self.relations
        subj = np.zeros((len(relations), self.n_entities), dtype=np.float32)
        obj = np.zeros((len(relations), self.n_entities), dtype=np.float32)
        for i, r in enumerate(relations):
            subj[i, self.subjects[r]] = 1.0
            obj[i, self.objects[r]] = 1.0
        return subj, obj

    @cached_property
    def chain_overlap(self) -> np.ndarray:
        """[i, j] is True when Y of relations[i] meets X of relations[j]."""
        subj, obj = self._incidence
        return (obj @ subj.T) > 0

    @cached_property
    def subject_overlap(self) -> np.ndarray:
        """[i, j] is True when X of relations[i] meets X of relations[j]."""
        subj, _ = self._incidence
        return (subj @ subj.T) > 0

    @cached_property
    def object_overlap(self) -> np.ndarray:
        """[i, j] is True when Y of relations[i] meets Y of relations[j]."""
        _, obj = self._incidence
        return (obj @ obj.T) > 0

    def restrict(self, keep: List[int]) -> "RelationDomains":
        """Domains for a subset of relations (ids unchanged)."""
        keep_set = set(keep)
        return RelationDomains(
            n_entities=self.n_entities,
            subjects={r: v for r, v in self.subjects.items() if r in keep_set},
            objects={r: v for r, v in self.objects.items() if r in keep_set},
            inverse_of={a: b for a, b in self.inverse_of.items() if a in keep_set and b in keep_set}
        )


def compute_domains(store: TripleStore) -> RelationDomains:
    """
    Collect X_r and Y_r for every relation present in the training split.

    Raises:
        EmptyStoreError: Training split is empty
    """
    train = store.train
    if len(train) == 0:
        raise EmptyStoreError("Cannot compute relation domains from an empty training split")

    frame = pd.DataFrame(train, columns=["s", "r", "o"])
    subjects: Dict[int, np.ndarray] = {}
    objects: Dict[int, np.ndarray] = {}
    for relation, group in frame.groupby("r", sort=True):
        subjects[int(relation)] = np.unique(group["s"].to_numpy(dtype=np.int64))
        objects[int(relation)] = np.unique(group["o"].to_numpy(dtype=np.int64))

    logger.debug(f"Computed domains for {len(subjects)} relation(s)")
    return RelationDomains(
        n_entities=store.n_entities,
        subjects=subjects,
        objects=objects,
        inverse_of=dict(store.inverse_of)
    )


def relation_cardinalities(store: TripleStore) -> pd.DataFrame:
    """
    Per-relation averages over training triples.

    Returns:
        DataFrame indexed by relation id with columns triples, subjects,
        objects, objects_per_subject, subjects_per_object
    """
    if len(store.train) == 0:
        raise EmptyStoreError("Cannot classify relations from an empty training split")

    frame = pd.DataFrame(store.train, columns=["s", "r", "o"])
    table = frame.groupby("r").agg(
        triples=("s", "size"),
        subjects=("s", "nunique"),
        objects=("o", "nunique")
    )
    table["objects_per_subject"] = table["triples"] / table["subjects"]
    table["subjects_per_object"] = table["triples"] / table["objects"]
    return table


def classify_relations(
    store: TripleStore,
    threshold: float = DEFAULT_CATEGORY_THRESHOLD
) -> Dict[int, RelationCategory]:
    """
    Assign each training relation to one of the four cardinality categories.

    Args:
        store: Triple store (training split used)
        threshold: A side counts as "many" when its average reaches this value

    Returns:
        Dict mapping relation id -> RelationCategory
    """
    table = relation_cardinalities(store)
    categories: Dict[int, RelationCategory] = {}
    for relation, row in table.iterrows():
        many_objects = row["objects_per_subject"] >= threshold
        many_subjects = row["subjects_per_object"] >= threshold
        if many_objects and many_subjects:
            category = RelationCategory.MANY_TO_MANY
        elif many_objects:
            category = RelationCategory.ONE_TO_MANY
        elif many_subjects:
            category = RelationCategory.MANY_TO_ONE
        else:
            category = RelationCategory.ONE_TO_ONE
        categories[int(relation)] = category
    return categories
