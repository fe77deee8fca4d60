"""
Link-prediction evaluation: ranks, MRR / HITS@k, type-checked MAP.
"""

from .ranking import (
    RAW,
    FILTERED,
    MODES,
    RankResult,
    pessimistic_rank,
    rank_entity,
    rank_triples,
)
from .average_precision import MapSummary, average_precision, map_summary, map_type_checked
from .report import CategoryCell, EvalReport, HITS_AT, UNCLASSIFIED, evaluate, evaluate_modes, summarize

__all__ = [
    "RAW",
    "FILTERED",
    "MODES",
    "RankResult",
    "pessimistic_rank",
    "rank_entity",
    "rank_triples",
    "MapSummary",
    "average_precision",
    "map_summary",
    "map_type_checked",
    "CategoryCell",
    "EvalReport",
    "HITS_AT",
    "UNCLASSIFIED",
    "evaluate",
    "evaluate_modes",
    "summarize",
]
