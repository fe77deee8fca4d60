"""
Scoring - Triple scores and analytic gradients for every model kind.

Each scorer works on projected entity vectors y1 (subject) and y2 (object)
and on the relation blocks gathered for a batch of relation ids. The chain
rule through the tanh projection is applied once, in accumulate_gradients
and grad, so scorers stay projection-agnostic.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Optional, Tuple, Union

import numpy as np

from .kinds import ModelKind, Projection, Slot
from .params import Model

logger = logging.getLogger(__name__)

DEFAULT_CHUNK_SIZE = 256

Blocks = Dict[str, np.ndarray]
Partials = Tuple[np.ndarray, np.ndarray, Blocks]


class Scorer:
    """Score and partial derivatives for one model kind."""

    def score(self, blocks: Blocks, r: np.ndarray, y1: np.ndarray, y2: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def partials(self, blocks: Blocks, r: np.ndarray, y1: np.ndarray, y2: np.ndarray,
                 coef: np.ndarray) -> Partials:
        """
        coef-weighted partial derivatives of the score.

        Returns:
            (d/dy1, d/dy2, {block: per-row d/dblock}), every array with a
            leading batch axis
        """
        raise NotImplementedError

    def score_against(self, rel: Blocks, fixed: np.ndarray, candidates: np.ndarray, slot: Slot) -> np.ndarray:
        """Scores with `fixed` in the other slot and each candidate row in `slot`."""
        raise NotImplementedError


class TransEScorer(Scorer):
    # -(2 V.(y1 - y2) - 2 y1.y2 + |V|^2), equal to 2 - |y1 - y2 + V|^2 for unit y1, y2

    def score(self, blocks, r, y1, y2):
        V = blocks["V"][r]
        return -(2.0 * np.sum(V * (y1 - y2), axis=1)
                 - 2.0 * np.sum(y1 * y2, axis=1)
                 + np.sum(V * V, axis=1))

    def partials(self, blocks, r, y1, y2, coef):
        V = blocks["V"][r]
        c = coef[:, None]
        return (
            c * (-2.0 * V + 2.0 * y2),
            c * (2.0 * V + 2.0 * y1),
            {"V": c * (-2.0 * (y1 - y2) - 2.0 * V)}
        )

    def score_against(self, rel, fixed, candidates, slot):
        V = rel["V"]
        vv = V @ V
        if slot is Slot.OBJECT:
            return -(2.0 * (V @ fixed) - 2.0 * (candidates @ V) - 2.0 * (candidates @ fixed) + vv)
        return -(2.0 * (candidates @ V) - 2.0 * (V @ fixed) - 2.0 * (candidates @ fixed) + vv)


class DistMultScorer(Scorer):

    def score(self, blocks, r, y1, y2):
        return np.sum(y1 * blocks["diag"][r] * y2, axis=1)

    def partials(self, blocks, r, y1, y2, coef):
        D = blocks["diag"][r]
        c = coef[:, None]
        return c * D * y2, c * D * y1, {"diag": c * y1 * y2}

    def score_against(self, rel, fixed, candidates, slot):
        return candidates @ (rel["diag"] * fixed)


class BilinearScorer(Scorer):

    def score(self, blocks, r, y1, y2):
        return np.einsum('ni,nij,nj->n', y1, blocks["M"][r], y2)

    def partials(self, blocks, r, y1, y2, coef):
        M = blocks["M"][r]
        c = coef[:, None]
        return (
            c * np.einsum('nij,nj->ni', M, y2),
            c * np.einsum('ni,nij->nj', y1, M),
            {"M": coef[:, None, None] * y1[:, :, None] * y2[:, None, :]}
        )

    def score_against(self, rel, fixed, candidates, slot):
        M = rel["M"]
        if slot is Slot.OBJECT:
            return candidates @ (fixed @ M)
        return candidates @ (M @ fixed)


class BilinearLinearScorer(Scorer):
    # one bilinear slice plus linear terms, multiplier fixed at 1, no nonlinearity

    def score(self, blocks, r, y1, y2):
        return (np.einsum('ni,nij,nj->n', y1, blocks["T"][r], y2)
                + np.sum(blocks["Q1"][r] * y1, axis=1)
                + np.sum(blocks["Q2"][r] * y2, axis=1))

    def partials(self, blocks, r, y1, y2, coef):
        T = blocks["T"][r]
        c = coef[:, None]
        return (
            c * (np.einsum('nij,nj->ni', T, y2) + blocks["Q1"][r]),
            c * (np.einsum('ni,nij->nj', y1, T) + blocks["Q2"][r]),
            {
                "T": coef[:, None, None] * y1[:, :, None] * y2[:, None, :],
                "Q1": c * y1,
                "Q2": c * y2,
            }
        )

    def score_against(self, rel, fixed, candidates, slot):
        T, Q1, Q2 = rel["T"], rel["Q1"], rel["Q2"]
        if slot is Slot.OBJECT:
            return candidates @ (fixed @ T + Q2) + Q1 @ fixed
        return candidates @ (T @ fixed + Q1) + Q2 @ fixed


class NTNScorer(Scorer):
    # u . tanh(z), z_k = y1 T_k y2 + Q1[:, k].y1 + Q2[:, k].y2

    def _activations(self, blocks, r, y1, y2):
        z = (np.einsum('ni,nkij,nj->nk', y1, blocks["T"][r], y2)
             + np.einsum('nik,ni->nk', blocks["Q1"][r], y1)
             + np.einsum('nik,ni->nk', blocks["Q2"][r], y2))
        return np.tanh(z)

    def score(self, blocks, r, y1, y2):
        return np.sum(blocks["u"][r] * self._activations(blocks, r, y1, y2), axis=1)

    def partials(self, blocks, r, y1, y2, coef):
        T = blocks["T"][r]
        h = self._activations(blocks, r, y1, y2)
        ck = coef[:, None] * blocks["u"][r] * (1.0 - h * h)
        return (
            np.einsum('nk,nkij,nj->ni', ck, T, y2) + np.einsum('nk,nik->ni', ck, blocks["Q1"][r]),
            np.einsum('nk,nkij,ni->nj', ck, T, y1) + np.einsum('nk,nik->ni', ck, blocks["Q2"][r]),
            {
                "T": ck[:, :, None, None] * y1[:, None, :, None] * y2[:, None, None, :],
                "Q1": y1[:, :, None] * ck[:, None, :],
                "Q2": y2[:, :, None] * ck[:, None, :],
                "u": coef[:, None] * h,
            }
        )

    def score_against(self, rel, fixed, candidates, slot):
        T, Q1, Q2, u = rel["T"], rel["Q1"], rel["Q2"], rel["u"]
        if slot is Slot.OBJECT:
            A = np.einsum('i,kij->kj', fixed, T)
            z = candidates @ A.T + (fixed @ Q1)[None, :] + candidates @ Q2
        else:
            A = np.einsum('kij,j->ki', T, fixed)
            z = candidates @ A.T + candidates @ Q1 + (fixed @ Q2)[None, :]
        return np.tanh(z) @ u


SCORERS: Dict[ModelKind, Scorer] = {
    ModelKind.TRANSE: TransEScorer(),
    ModelKind.DISTMULT: DistMultScorer(),
    ModelKind.BILINEAR: BilinearScorer(),
    ModelKind.BILINEAR_LINEAR: BilinearLinearScorer(),
    ModelKind.NTN: NTNScorer(),
}


def get_scorer(kind: ModelKind) -> Scorer:
    return SCORERS[ModelKind.parse(kind)]


def _projection_derivative(model: Model, y: np.ndarray) -> Optional[np.ndarray]:
    if model.projection is Projection.TANH:
        return 1.0 - y * y
    return None


def project_entity(model: Model, entity: int) -> np.ndarray:
    """Projected vector of one entity (row itself, or tanh of the row)."""
    return model.entities.project(int(entity))


def score_batch(model: Model, triples: np.ndarray, chunk_size: int = DEFAULT_CHUNK_SIZE) -> np.ndarray:
    """Scores for an (n, 3) array of triples."""
    triples = np.asarray(triples, dtype=np.int64).reshape(-1, 3)
    scorer = get_scorer(model.kind)
    blocks = model.relations.blocks
    out = np.empty(len(triples), dtype=np.float64)
    for start in range(0, len(triples), chunk_size):
        chunk = triples[start:start + chunk_size]
        y1 = model.entities.project(chunk[:, 0])
        y2 = model.entities.project(chunk[:, 2])
        out[start:start + chunk_size] = scorer.score(blocks, chunk[:, 1], y1, y2)
    return out


def score(model: Model, triple) -> float:
    """Plausibility of one (subject, relation, object) triple; higher is more plausible."""
    return float(score_batch(model, np.asarray(triple, dtype=np.int64))[0])


def score_candidates(model: Model, entity: int, relation: int, slot) -> np.ndarray:
    """
    Score every entity placed in `slot`, the other argument fixed to `entity`.

    Args:
        model: Model
        entity: Id of the argument that stays fixed
        relation: Relation id
        slot: Slot being filled by candidates ("subject" or "object")

    Returns:
        np.ndarray of shape (n_entities,)
    """
    slot = Slot.parse(slot)
    scorer = get_scorer(model.kind)
    fixed = model.entities.project(int(entity))
    candidates = model.entities.project()
    return scorer.score_against(model.relations.for_relation(int(relation)), fixed, candidates, slot)


def new_gradient_buffers(model: Model) -> Dict[str, np.ndarray]:
    """Zero arrays shaped like every parameter, keyed by checkpoint name."""
    return {name: np.zeros_like(array) for name, array in model.parameters()}


def accumulate_gradients(
    model: Model,
    triples: np.ndarray,
    coef: np.ndarray,
    grads: Optional[Dict[str, np.ndarray]] = None,
    chunk_size: int = DEFAULT_CHUNK_SIZE
) -> Dict[str, np.ndarray]:
    """
    Add sum_i coef_i * d score(triple_i) / d theta into parameter-shaped buffers.

    Args:
        model: Model
        triples: (n, 3) triples
        coef: (n,) weights; rows with weight 0 are skipped
        grads: Buffers from new_gradient_buffers, created when omitted
        chunk_size: Rows processed per vectorized step

    Returns:
        The gradient buffers
    """
    if grads is None:
        grads = new_gradient_buffers(model)
    triples = np.asarray(triples, dtype=np.int64).reshape(-1, 3)
    coef = np.asarray(coef, dtype=np.float64)
    keep = coef != 0
    triples, coef = triples[keep], coef[keep]

    scorer = get_scorer(model.kind)
    blocks = model.relations.blocks
    entity_grad = grads["entity"]

    for start in range(0, len(triples), chunk_size):
        chunk = triples[start:start + chunk_size]
        s, r, o = chunk[:, 0], chunk[:, 1], chunk[:, 2]
        y1 = model.entities.project(s)
        y2 = model.entities.project(o)
        g1, g2, rel = scorer.partials(blocks, r, y1, y2, coef[start:start + chunk_size])

        d1 = _projection_derivative(model, y1)
        if d1 is not None:
            g1 = g1 * d1
            g2 = g2 * _projection_derivative(model, y2)

        np.add.at(entity_grad, s, g1)
        np.add.at(entity_grad, o, g2)
        for name, partial in rel.items():
            np.add.at(grads[f"relation/{name}"], r, partial)

    return grads


@dataclass
class TripleGradient:
    """Partial derivatives of one triple's score."""
    subject: np.ndarray
    object: np.ndarray
    relation: Dict[str, np.ndarray]

    def select(self, slot: str) -> Union[np.ndarray, Dict[str, np.ndarray]]:
        if slot == "subject":
            return self.subject
        if slot == "object":
            return self.object
        if slot == "relation":
            return self.relation
        raise ValueError(f"Unknown gradient slot '{slot}', expected subject, object or relation")


def grad(model: Model, triple, slot: Optional[str] = None):
    """
    Analytic gradient of score(model, triple).

    Derivatives are taken with respect to the stored entity rows, so the
    tanh projection is differentiated through.

    Args:
        model: Model
        triple: (subject, relation, object)
        slot: "subject", "object" or "relation" to get one part; None for all

    Returns:
        TripleGradient, or the selected part
    """
    s, r, o = (int(v) for v in triple)
    scorer = get_scorer(model.kind)
    y1 = model.entities.project(np.array([s]))
    y2 = model.entities.project(np.array([o]))
    g1, g2, rel = scorer.partials(model.relations.blocks, np.array([r]), y1, y2, np.ones(1))

    d1 = _projection_derivative(model, y1)
    if d1 is not None:
        g1 = g1 * d1
        g2 = g2 * _projection_derivative(model, y2)

    result = TripleGradient(
        subject=g1[0],
        object=g2[0],
        relation={name: partial[0] for name, partial in rel.items()}
    )
    return result if slot is None else result.select(slot)
