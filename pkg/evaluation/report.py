"""
Evaluation Report - MRR, HITS@k, mean rank and the per-category breakdown.
"""

import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Iterable, List, Optional

import numpy as np
import pandas as pd

from kb import RelationCategory, RelationDomains, TripleStore, classify_relations, compute_domains
from kb.metadata import DEFAULT_CATEGORY_THRESHOLD
from kb.store import EmptyStoreError
from models import Slot
from .average_precision import map_summary
from .ranking import FILTERED, MODES, CandidateScorer, RankResult, check_mode, rank_triples

logger = logging.getLogger(__name__)

HITS_AT = (1, 3, 10)
UNCLASSIFIED = "unclassified"


@dataclass
class CategoryCell:
    hits10: float
    count: int


@dataclass
class EvalReport:
    """Metrics for one ranking mode."""
    mode: str
    mrr: float
    hits: Dict[int, float]
    mean_rank: float
    n_queries: int
    categories: Dict[str, Dict[str, CategoryCell]] = field(default_factory=dict)
    unclassified: int = 0
    map: Optional[float] = None
    map_queries: int = 0
    map_skipped: int = 0

    @property
    def hits10(self) -> float:
        return self.hits[10]

    def to_rows(self) -> List[Dict[str, Any]]:
        """metric,value rows for CSV output."""
        rows = [
            {"metric": "mode", "value": self.mode},
            {"metric": "queries", "value": self.n_queries},
            {"metric": "mrr", "value": self.mrr},
        ]
        rows += [{"metric": f"hits@{k}", "value": v} for k, v in sorted(self.hits.items())]
        rows.append({"metric": "mean_rank", "value": self.mean_rank})
        rows.append({"metric": "unclassified_queries", "value": self.unclassified})
        if self.map is not None:
            rows += [
                {"metric": "map", "value": self.map},
                {"metric": "map_queries", "value": self.map_queries},
                {"metric": "map_skipped", "value": self.map_skipped},
            ]
        return rows

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.to_rows(), columns=["metric", "value"])

    def category_frame(self) -> pd.DataFrame:
        """4 categories x 2 slots: HITS@10 and query counts."""
        records = []
        for category in RelationCategory:
            cells = self.categories.get(category.value, {})
            record = {"category": category.value}
            for slot in Slot:
                cell = cells.get(slot.value, CategoryCell(float("nan"), 0))
                record[f"{slot.value}_hits10"] = cell.hits10
                record[f"{slot.value}_count"] = cell.count
            records.append(record)
        return pd.DataFrame(records)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["hits"] = {str(k): v for k, v in self.hits.items()}
        return data


def summarize(
    results: Iterable[RankResult],
    mode: str = FILTERED,
    categories: Optional[Dict[int, RelationCategory]] = None
) -> EvalReport:
    """
    Aggregate RankResults into an EvalReport for one mode.

    Args:
        results: Ranks of every query
        mode: "raw" or "filtered"
        categories: Relation id -> category; relations missing are unclassified
    """
    check_mode(mode)
    results = list(results)
    if not results:
        raise EmptyStoreError("No ranking results to summarize")

    ranks = np.asarray([r.in_mode(mode) for r in results], dtype=np.float64)
    report = EvalReport(
        mode=mode,
        mrr=float(np.mean(1.0 / ranks)),
        hits={k: float(100.0 * np.mean(ranks <= k)) for k in HITS_AT},
        mean_rank=float(np.mean(ranks)),
        n_queries=len(results)
    )

    if categories is not None:
        frame = pd.DataFrame({
            "category": [
                categories[r.triple.relation].value if r.triple.relation in categories else UNCLASSIFIED
                for r in results
            ],
            "slot": [r.slot.value for r in results],
            "hit": ranks <= 10,
        })
        report.unclassified = int((frame["category"] == UNCLASSIFIED).sum())
        grouped = frame[frame["category"] != UNCLASSIFIED].groupby(["category", "slot"])["hit"].agg(["mean", "size"])
        for (category, slot), row in grouped.iterrows():
            report.categories.setdefault(category, {})[slot] = CategoryCell(
                hits10=float(100.0 * row["mean"]), count=int(row["size"])
            )

    return report


def evaluate_modes(
    model: CandidateScorer,
    store: TripleStore,
    modes: Iterable[str] = MODES,
    split: str = "test",
    domains: Optional[RelationDomains] = None,
    with_map: bool = False,
    workers: int = 1,
    threshold: float = DEFAULT_CATEGORY_THRESHOLD
) -> Dict[str, EvalReport]:
    """
    Rank every query once and report each requested mode.

    Args:
        model: Model or any object with score_candidates
        store: Triple store
        modes: Subset of ("raw", "filtered")
        split: Split holding the queries
        domains: Relation domains for MAP (computed from train when omitted)
        with_map: Also compute type-checked MAP
        workers: Threads used for ranking
        threshold: Category threshold

    Raises:
        EmptyStoreError: Query split is empty
    """
    modes = [check_mode(m) for m in modes]
    queries = store.split(split)
    if len(queries) == 0:
        raise EmptyStoreError(f"Cannot evaluate on an empty '{split}' split")

    logger.info(f"Ranking {len(queries)} {split} triple(s) in both slots ({', '.join(modes)})")
    results = rank_triples(model, store, queries, workers=workers)
    categories = classify_relations(store, threshold) if len(store.train) else {}

    summary = None
    if with_map:
        summary = map_summary(model, store, domains if domains is not None else compute_domains(store), split)

    reports = {}
    for mode in modes:
        report = summarize(results, mode, categories)
        if summary is not None:
            report.map, report.map_queries, report.map_skipped = summary.value, summary.queries, summary.skipped
        logger.info(f"[{mode}] MRR {report.mrr:.4f}, HITS@10 {report.hits10:.2f}%")
        reports[mode] = report
    return reports


def evaluate(
    model: CandidateScorer,
    store: TripleStore,
    mode: str = FILTERED,
    **kwargs
) -> EvalReport:
    """Evaluate one ranking mode; keyword arguments as for evaluate_modes."""
    return evaluate_modes(model, store, modes=[mode], **kwargs)[mode]
