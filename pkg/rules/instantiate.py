"""
Rule Instantiation - Predictions from body paths, confidence and precision curves.

Body paths a1 -B1-> a2 -...-> a(n+1) are enumerated with pandas joins on the
shared entity columns. Each distinct endpoint pair yields one prediction
(a1, H, a(n+1)); the lexicographically smallest witnessing path is kept.
"""

import logging
from typing import Iterable, List, NamedTuple, Sequence, Tuple

import numpy as np
import pandas as pd

from kb import Triple, TripleStore

logger = logging.getLogger(__name__)

DEFAULT_PREDICTION_CAP = 10000


class UndefinedConfidenceError(ArithmeticError):
    """Raised when a rule produces no predictions."""


class Prediction(NamedTuple):
    triple: Triple
    path: Tuple[int, ...]


def instantiate_paths(body: Sequence[int], train: np.ndarray) -> pd.DataFrame:
    """
    Distinct endpoint pairs of body paths in `train`, one witnessing path each.

    Returns:
        DataFrame with columns a0 ... an, sorted by path
    """
    columns = [f"a{i}" for i in range(len(body) + 1)]
    frame = pd.DataFrame(train, columns=["s", "r", "o"])

    paths = None
    for step, relation in enumerate(body):
        edges = frame.loc[frame["r"] == relation, ["s", "o"]].rename(
            columns={"s": columns[step], "o": columns[step + 1]}
        )
        paths = edges if paths is None else paths.merge(edges, on=columns[step], how="inner")
        if paths.empty:
            return pd.DataFrame({c: pd.Series(dtype=np.int64) for c in columns})

    paths = paths[columns].sort_values(columns, kind="mergesort")
    paths = paths.drop_duplicates(subset=[columns[0], columns[-1]], keep="first")
    return paths.reset_index(drop=True).astype(np.int64)


def rule_predictions(head: int, body: Sequence[int], store: TripleStore) -> np.ndarray:
    """(k, 3) predicted triples (a1, head, a(n+1)) ordered by witnessing path."""
    paths = instantiate_paths(body, store.train)
    if paths.empty:
        return np.zeros((0, 3), dtype=np.int64)
    return np.stack([
        paths.iloc[:, 0].to_numpy(),
        np.full(len(paths), int(head), dtype=np.int64),
        paths.iloc[:, -1].to_numpy(),
    ], axis=1)


def instantiate_rule(rule, store: TripleStore) -> List[Prediction]:
    """
    Predictions of `rule` (anything with .head and .body) over the training split.

    Raises:
        ValueError: Body length other than 2 or 3
    """
    if len(rule.body) not in (2, 3):
        raise ValueError(f"Rule body must have length 2 or 3, got {len(rule.body)}")
    paths = instantiate_paths(rule.body, store.train)
    predictions = []
    for row in paths.to_numpy().tolist():
        predictions.append(Prediction(Triple(row[0], int(rule.head), row[-1]), tuple(row)))
    return predictions


def prediction_counts(head: int, body: Sequence[int], store: TripleStore) -> Tuple[np.ndarray, int]:
    """Predicted triples and how many of them are training facts."""
    predictions = rule_predictions(head, body, store)
    correct = int(store.train_index.contains_batch(predictions).sum()) if len(predictions) else 0
    return predictions, correct


def confidence(rule, store: TripleStore) -> float:
    """
    Fraction of the rule's predictions already present in train.

    Raises:
        UndefinedConfidenceError: The rule makes no prediction
    """
    predictions, correct = prediction_counts(rule.head, rule.body, store)
    if len(predictions) == 0:
        raise UndefinedConfidenceError(f"Rule {tuple(rule.body)} => {rule.head} has no predictions")
    return correct / len(predictions)


def precision_curve(
    rules: Iterable,
    store: TripleStore,
    cap: int = DEFAULT_PREDICTION_CAP
) -> List[Tuple[int, float]]:
    """
    Cumulative precision on unseen predictions, rule by rule.

    Predictions already in train or valid are ignored; the remaining ones
    are pooled without repetition. A point (pool size, fraction of the pool
    found in test) is emitted whenever a rule grows the pool, and iteration
    stops once the pool exceeds `cap`.

    Args:
        rules: Rules sorted by decreasing confidence (with .head and .body,
            and optionally cached .predictions)
        store: Triple store
        cap: Maximum pool size
    """
    seen, test = store.seen_index, store.test_index
    pool = np.zeros(0, dtype=np.int64)
    in_test = 0
    points: List[Tuple[int, float]] = []

    for rule in rules:
        predictions = getattr(rule, "predictions", None)
        if predictions is None:
            predictions = rule_predictions(rule.head, rule.body, store)
        if len(predictions) == 0:
            continue

        unseen = predictions[~seen.contains_batch(predictions)]
        keys, first = np.unique(seen.encode(unseen), return_index=True)
        fresh = ~np.isin(keys, pool)
        if not fresh.any():
            continue

        pool = np.union1d(pool, keys[fresh])
        in_test += int(test.contains_batch(unseen[first[fresh]]).sum())
        points.append((int(pool.size), in_test / pool.size))

        if pool.size > cap:
            break

    return points
