"""
Knowledge base core: vocabulary, triple store, relation metadata.
"""

from .vocabulary import Vocabulary, UnknownTokenError
from .store import (
    Triple,
    TripleIndex,
    TripleStore,
    TripleParseError,
    DuplicateTripleError,
    EmptyStoreError,
    load_triples,
    load_dataset,
    save_triples,
    filter_frequent_relations,
    augment_inverses,
    INVERSE_SUFFIX,
)
from .metadata import (
    RelationDomains,
    RelationCategory,
    compute_domains,
    classify_relations,
    relation_cardinalities,
)

__all__ = [
    "Vocabulary",
    "UnknownTokenError",
    "Triple",
    "TripleIndex",
    "TripleStore",
    "TripleParseError",
    "DuplicateTripleError",
    "EmptyStoreError",
    "load_triples",
    "load_dataset",
    "save_triples",
    "filter_frequent_relations",
    "augment_inverses",
    "INVERSE_SUFFIX",
    "RelationDomains",
    "RelationCategory",
    "compute_domains",
    "classify_relations",
    "relation_cardinalities",
]
