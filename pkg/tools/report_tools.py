"""
Report Tools - CSV tables, rule listings, prediction files and vector exports.

All writers render to a string first and hand it to atomic_write_text.
"""

import logging
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np
import pandas as pd

from kb import TripleStore, Vocabulary, save_triples
from models import Model
from .file_tools import atomic_write_text

logger = logging.getLogger(__name__)

VALUE_FORMAT = ".17g"
RULE_VARIABLES = "abcd"


def write_frame(path: str, frame: pd.DataFrame) -> Path:
    """Write a DataFrame as CSV (no index)."""
    return atomic_write_text(path, frame.to_csv(index=False, lineterminator="\n"))


def write_eval_report(directory: str, report, suffix: str = "") -> Dict[str, str]:
    """
    metrics<suffix>.csv (metric,value) and categories<suffix>.csv (4 categories x 2 slots).

    Returns:
        Mapping of output kind -> path
    """
    out = Path(directory)
    metrics = write_frame(out / f"metrics{suffix}.csv", report.to_frame())
    categories = write_frame(out / f"categories{suffix}.csv", report.category_frame())
    return {"metrics": str(metrics), "categories": str(categories)}


def format_rule(head: int, body: Sequence[int], vocab: Vocabulary) -> str:
    """B1(a,b) & B2(b,c) => H(a,c)"""
    atoms = [
        f"{vocab.relation_name(r)}({RULE_VARIABLES[i]},{RULE_VARIABLES[i + 1]})"
        for i, r in enumerate(body)
    ]
    return f"{' & '.join(atoms)} => {vocab.relation_name(head)}(a,{RULE_VARIABLES[len(body)]})"


def render_rules(rules: Iterable, vocab: Vocabulary) -> str:
    lines = [
        f"{format_rule(rule.head, rule.body, vocab)}\t{rule.distance:{VALUE_FORMAT}}\t"
        f"{rule.confidence:{VALUE_FORMAT}}\t{rule.n_predictions}\n"
        for rule in rules
    ]
    return "".join(lines)


def write_rules(path: str, rules: Iterable, vocab: Vocabulary) -> Path:
    """One rule per line: rule text, distance, confidence, number of predictions."""
    return atomic_write_text(path, render_rules(rules, vocab))


def unseen_predictions(rules: Iterable, store: TripleStore) -> np.ndarray:
    """Predicted triples absent from train and valid, first occurrence order, no repeats."""
    collected: List[np.ndarray] = [p for p in (getattr(r, "predictions", None) for r in rules) if p is not None and len(p)]
    if not collected:
        return np.zeros((0, 3), dtype=np.int64)
    triples = np.concatenate(collected)
    triples = triples[~store.seen_index.contains_batch(triples)]
    _, first = np.unique(store.seen_index.encode(triples), return_index=True)
    return triples[np.sort(first)]


def write_predictions(path: str, rules: Iterable, store: TripleStore) -> Path:
    """Unseen predictions in the triple TSV format."""
    return save_triples(path, unseen_predictions(rules, store), store.vocab)


def write_precision_curve(path: str, points: Sequence[Tuple[int, float]]) -> Path:
    frame = pd.DataFrame(list(points), columns=["predictions", "precision"])
    return write_frame(path, frame)


def render_vectors(names: Sequence[str], rows: np.ndarray) -> str:
    rows = np.asarray(rows, dtype=np.float64).reshape(len(names), -1)
    return "".join(
        name + " " + " ".join(format(v, VALUE_FORMAT) for v in row) + "\n"
        for name, row in zip(names, rows.tolist())
    )


def export_entities(path: str, model: Model, vocab: Vocabulary) -> Path:
    """Stored entity rows, one "token v1 ... vd" line each."""
    return atomic_write_text(path, render_vectors(vocab.entity_names, model.entities.table))


def export_relations(path: str, model: Model, vocab: Vocabulary) -> Path:
    """
    Relation parameters, one line per relation.

    Multi-block kinds concatenate their blocks in storage order; matrices are row-major.
    """
    flat = np.concatenate(
        [block.reshape(model.n_relations, -1) for block in model.relations.blocks.values()], axis=1
    )
    return atomic_write_text(path, render_vectors(vocab.relation_names, flat))
