"""
Rule mining from relation embeddings (EmbedRule).
"""

from .sequences import (
    RelationSequence,
    SUPPORTED_LENGTHS,
    prune_relations,
    enumerate_sequences,
    is_type_consistent,
    count_sequences,
)
from .instantiate import (
    Prediction,
    UndefinedConfidenceError,
    DEFAULT_PREDICTION_CAP,
    instantiate_paths,
    instantiate_rule,
    rule_predictions,
    prediction_counts,
    confidence,
    precision_curve,
)
from .embed_rule import (
    RuleCandidate,
    EmptyInputError,
    DEFAULT_K,
    DELTA_PRESETS,
    default_delta,
    gap_cutoff,
    rank_sequences,
    mine_head,
    embed_rule,
)

__all__ = [
    "RelationSequence",
    "SUPPORTED_LENGTHS",
    "prune_relations",
    "enumerate_sequences",
    "is_type_consistent",
    "count_sequences",
    "Prediction",
    "UndefinedConfidenceError",
    "DEFAULT_PREDICTION_CAP",
    "instantiate_paths",
    "instantiate_rule",
    "rule_predictions",
    "prediction_counts",
    "confidence",
    "precision_curve",
    "RuleCandidate",
    "EmptyInputError",
    "DEFAULT_K",
    "DELTA_PRESETS",
    "default_delta",
    "gap_cutoff",
    "rank_sequences",
    "mine_head",
    "embed_rule",
]
