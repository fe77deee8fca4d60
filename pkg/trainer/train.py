"""
Training Loop - Mini-batch margin ranking with AdaGrad and entity renormalization.

Each epoch shuffles the training triples, splits them into the configured
number of mini-batches and, per batch: draws one subject-corrupted and one
object-corrupted negative per positive, sums the hinge subgradients,
takes one AdaGrad step and renormalizes the entity rows that moved.
"""

import logging
import time
from typing import Callable, Iterable, Optional, Tuple

import numpy as np

from kb import EmptyStoreError, TripleStore
from models import Model, accumulate_gradients, normalize_rows, score_batch
from models.params import INIT_RANGE
from .adagrad import adagrad_step
from .sampling import sample_negatives_batch
from .state import AdaGradState, EpochRecord, TrainConfig, TrainHistory

logger = logging.getLogger(__name__)

EpochCallback = Callable[[int, Model, EpochRecord], None]


def margin_loss(s_pos, s_neg, margin: float = 1.0):
    """max(s_neg - s_pos + margin, 0); scalars in, float out, arrays elementwise."""
    loss = np.maximum(np.asarray(s_neg, dtype=np.float64) - s_pos + margin, 0.0)
    return float(loss) if loss.ndim == 0 else loss


def renormalize_entities(
    model: Model,
    rows: Optional[np.ndarray] = None,
    rng: Optional[np.random.Generator] = None
) -> Model:
    """
    Scale entity rows to unit L2 norm in place.

    Zero rows are redrawn uniformly from [-0.1, 0.1] and normalized.

    Args:
        model: Model
        rows: Restrict to these entity ids (all rows when omitted)
        rng: Generator for redrawing zero rows
    """
    table = model.entities.table
    zero = normalize_rows(table, rows)
    if zero.size:
        rng = rng if rng is not None else np.random.default_rng()
        logger.debug(f"Re-randomizing {zero.size} zero-norm entity row(s)")
        while zero.size:
            table[zero] = rng.uniform(-INIT_RANGE, INIT_RANGE, size=(zero.size, table.shape[1]))
            zero = normalize_rows(table, zero)
    return model


def validation_mrr(model: Model, store: TripleStore, config: TrainConfig) -> float:
    """Filtered MRR on a fixed, seed-determined sample of the validation split."""
    from evaluation import rank_triples

    valid = store.valid
    if len(valid) > config.valid_sample:
        picked = np.random.default_rng(config.seed).choice(len(valid), config.valid_sample, replace=False)
        valid = valid[np.sort(picked)]
    results = rank_triples(model, store, valid)
    return float(np.mean([1.0 / r.filtered_rank for r in results]))


def _train_batch(
    model: Model,
    store: TripleStore,
    positives: np.ndarray,
    config: TrainConfig,
    state: AdaGradState,
    rng: np.random.Generator
) -> Tuple[float, int]:
    neg_subject, neg_object = sample_negatives_batch(
        positives, store, rng, config.max_sampling_attempts
    )

    s_pos = score_batch(model, positives, config.chunk_size)
    loss_subject = margin_loss(s_pos, score_batch(model, neg_subject, config.chunk_size), config.margin)
    loss_object = margin_loss(s_pos, score_batch(model, neg_object, config.chunk_size), config.margin)

    # a hinge exactly at zero contributes no gradient
    active_subject = (loss_subject > 0).astype(np.float64)
    active_object = (loss_object > 0).astype(np.float64)

    grads = accumulate_gradients(
        model,
        np.concatenate([positives, neg_subject, neg_object]),
        np.concatenate([-(active_subject + active_object), active_subject, active_object]),
        chunk_size=config.chunk_size
    )

    table = model.entities.table
    before = table.copy()
    adagrad_step(model, grads, state, config.learning_rate, config.l2)
    moved = np.flatnonzero(np.any(table != before, axis=1))
    if moved.size:
        renormalize_entities(model, moved, rng)

    return float(loss_subject.sum() + loss_object.sum()), int(active_subject.sum() + active_object.sum())


def train(
    model: Model,
    store: TripleStore,
    config: TrainConfig,
    state: Optional[AdaGradState] = None,
    callbacks: Optional[Iterable[EpochCallback]] = None,
    start_epoch: int = 0
) -> Tuple[Model, TrainHistory]:
    """
    Optimize `model` in place on the training split.

    Args:
        model: Model to train
        store: Triple store (train split used for positives and corruption checks)
        config: Hyperparameters
        state: AdaGrad accumulators to resume from
        callbacks: Called after every epoch with (epoch, read-only snapshot, record)
        start_epoch: Number of epochs already completed (for resumed runs)

    Returns:
        (model, history)

    Raises:
        EmptyStoreError: Empty training split
        SamplingError: Corruption attempts exhausted
        NonFiniteGradientError: Diverged gradients
    """
    train_triples = store.train
    if len(train_triples) == 0:
        raise EmptyStoreError("Cannot train on an empty training split")
    if model.n_entities != store.n_entities or model.n_relations != store.n_relations:
        raise ValueError(
            f"Model has {model.n_entities} entities / {model.n_relations} relations, "
            f"store has {store.n_entities} / {store.n_relations}"
        )

    state = state if state is not None else AdaGradState.for_model(model)
    callbacks = list(callbacks or [])
    history = TrainHistory()
    rng = np.random.default_rng(config.seed + start_epoch)
    pairs = config.negatives_per_positive * len(train_triples)

    logger.info(
        f"Training {model.kind.value} (d={model.dim}, {model.projection.value}) for {config.epochs} epoch(s), "
        f"{config.batches} mini-batch(es), lr={config.learning_rate}, l2={config.l2}"
    )

    for epoch in range(start_epoch + 1, start_epoch + config.epochs + 1):
        started = time.perf_counter()
        total_loss = 0.0
        active = 0

        order = rng.permutation(len(train_triples))
        for batch in np.array_split(order, config.batches):
            if batch.size == 0:
                continue
            loss, batch_active = _train_batch(model, store, train_triples[batch], config, state, rng)
            total_loss += loss
            active += batch_active

        record = EpochRecord(
            epoch=epoch,
            mean_loss=total_loss / pairs,
            active_pairs=active,
            pairs=pairs,
            seconds=time.perf_counter() - started
        )
        if config.eval_every and epoch % config.eval_every == 0 and len(store.valid):
            record.valid_mrr = validation_mrr(model, store, config)

        history.append(record)
        logger.debug(
            f"Epoch {epoch}: mean loss {record.mean_loss:.6f}, {active}/{pairs} active pair(s)"
            + (f", valid MRR {record.valid_mrr:.4f}" if record.valid_mrr is not None else "")
        )

        if callbacks:
            snapshot = model.snapshot()
            for callback in callbacks:
                callback(epoch, snapshot, record)

    if len(history):
        logger.info(f"Training finished: final mean loss {history.epochs[-1].mean_loss:.6f}")
    return model, history
