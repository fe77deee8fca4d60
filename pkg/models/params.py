"""
Model Parameters - Entity embeddings, relation parameter blocks, initialization.

Entity rows are the stored vectors; the projected representation used for
scoring is the row itself (linear) or its elementwise tanh.
Relation parameters are stacked per block with a leading relation axis,
e.g. Bilinear "M" has shape (n_relations, d, d).
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterator, Optional, Tuple

import numpy as np

from .kinds import DEFAULT_SLICES, ModelKind, Projection, relation_block_shapes

logger = logging.getLogger(__name__)

INIT_RANGE = 0.1


class DimensionError(ValueError):
    """Raised when a vector or block does not match the model dimension."""


@dataclass(eq=False)
class EntityEmbeddings:
    """Stored entity rows (n_entities, d) and the projection applied before scoring."""
    table: np.ndarray
    projection: Projection = Projection.LINEAR

    @property
    def n_entities(self) -> int:
        return self.table.shape[0]

    @property
    def dim(self) -> int:
        return self.table.shape[1]

    def project(self, ids=None) -> np.ndarray:
        rows = self.table if ids is None else self.table[ids]
        if self.projection is Projection.TANH:
            return np.tanh(rows)
        return rows


@dataclass(eq=False)
class RelationParams:
    """Stacked relation parameter blocks for one model kind."""
    kind: ModelKind
    blocks: Dict[str, np.ndarray]

    @property
    def n_relations(self) -> int:
        return next(iter(self.blocks.values())).shape[0]

    def __getitem__(self, name: str) -> np.ndarray:
        return self.blocks[name]

    def for_relation(self, relation: int) -> Dict[str, np.ndarray]:
        """Views of every block for a single relation."""
        return {name: block[relation] for name, block in self.blocks.items()}


@dataclass(eq=False)
class Model:
    """
    Embedding model: kind, entity table, relation blocks and hyperparameters.
    """
    kind: ModelKind
    entities: EntityEmbeddings
    relations: RelationParams
    dim: int
    slices: int = DEFAULT_SLICES
    metadata: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        expected = relation_block_shapes(self.kind, self.dim, self.slices)
        if list(expected) != list(self.relations.blocks):
            raise DimensionError(
                f"{self.kind.value} expects blocks {list(expected)}, got {list(self.relations.blocks)}"
            )
        if self.entities.dim != self.dim:
            raise DimensionError(f"Entity rows have length {self.entities.dim}, model dimension is {self.dim}")
        for name, shape in expected.items():
            block = self.relations.blocks[name]
            if block.shape[1:] != shape:
                raise DimensionError(f"Block '{name}' has shape {block.shape[1:]}, expected {shape}")

    @property
    def projection(self) -> Projection:
        return self.entities.projection

    @property
    def n_entities(self) -> int:
        return self.entities.n_entities

    @property
    def n_relations(self) -> int:
        return self.relations.n_relations

    def parameters(self) -> Iterator[Tuple[str, np.ndarray]]:
        """Every trainable array under its checkpoint name."""
        yield "entity", self.entities.table
        for name, block in self.relations.blocks.items():
            yield f"relation/{name}", block

    def copy(self) -> "Model":
        return Model(
            kind=self.kind,
            entities=EntityEmbeddings(self.entities.table.copy(), self.entities.projection),
            relations=RelationParams(self.kind, {n: b.copy() for n, b in self.relations.blocks.items()}),
            dim=self.dim,
            slices=self.slices,
            metadata=dict(self.metadata)
        )

    def snapshot(self) -> "Model":
        """Copy whose arrays are read-only."""
        snap = self.copy()
        for _, array in snap.parameters():
            array.setflags(write=False)
        return snap

    def score_candidates(self, entity: int, relation: int, slot) -> np.ndarray:
        from .scoring import score_candidates
        return score_candidates(self, entity, relation, slot)


def normalize_rows(table: np.ndarray, rows: Optional[np.ndarray] = None) -> np.ndarray:
    """Divide rows by their L2 norm in place. Returns the ids of zero rows left untouched."""
    view = table if rows is None else table[rows]
    norms = np.linalg.norm(view, axis=1)
    zero = norms == 0
    safe = np.where(zero, 1.0, norms)
    if rows is None:
        table /= safe[:, None]
        return np.flatnonzero(zero)
    table[rows] = view / safe[:, None]
    return np.asarray(rows)[zero]


def load_pretrained_vectors(path: str) -> Dict[str, np.ndarray]:
    """
    Read "token v1 ... vd" lines into a token -> vector mapping.

    Raises:
        DimensionError: Lines disagree on vector length
    """
    vectors: Dict[str, np.ndarray] = {}
    length = None
    with open(path, 'r', encoding='utf-8') as f:
        for line_number, line in enumerate(f, 1):
            fields = line.split()
            if not fields:
                continue
            vector = np.asarray([float(v) for v in fields[1:]], dtype=np.float64)
            if length is None:
                length = vector.size
            elif vector.size != length:
                raise DimensionError(
                    f"{path}:{line_number}: vector of length {vector.size}, previous lines had {length}"
                )
            vectors[fields[0]] = vector
    return vectors


def init_model(
    kind,
    n_entities: int,
    n_relations: int,
    dim: int,
    seed: int = 0,
    pretrained: Optional[str] = None,
    entity_names=None,
    projection=Projection.LINEAR,
    slices: int = DEFAULT_SLICES
) -> Model:
    """
    Create a randomly initialized model.

    Entity rows and relation blocks are drawn uniformly from [-0.1, 0.1]
    (entities first, then blocks in storage order), then entity rows are
    unit-normalized. BilinearLinear has no "u" block; its multiplier is 1.

    Args:
        kind: Model kind
        n_entities: Number of entities
        n_relations: Number of relations
        dim: Embedding dimension d
        seed: Random seed
        pretrained: Optional vector file ("token v1 ... vd") used for EV-init
        entity_names: Entity tokens by id, required with pretrained
        projection: linear or tanh
        slices: Tensor slices m for NTN

    Returns:
        Model

    Raises:
        DimensionError: Pretrained vectors whose length differs from dim
    """
    kind = ModelKind.parse(kind)
    projection = Projection.parse(projection)
    if dim < 1:
        raise ValueError(f"Embedding dimension must be >= 1, got {dim}")
    if n_entities < 1 or n_relations < 1:
        raise ValueError("A model needs at least one entity and one relation")

    rng = np.random.default_rng(seed)
    table = rng.uniform(-INIT_RANGE, INIT_RANGE, size=(n_entities, dim))
    blocks = {
        name: rng.uniform(-INIT_RANGE, INIT_RANGE, size=(n_relations,) + shape)
        for name, shape in relation_block_shapes(kind, dim, slices).items()
    }

    metadata = {}
    if pretrained is not None:
        if entity_names is None:
            raise ValueError("entity_names are required to map pretrained vectors")
        vectors = load_pretrained_vectors(pretrained)
        covered = 0
        for entity_id, name in enumerate(entity_names):
            vector = vectors.get(name)
            if vector is None:
                continue
            if vector.size != dim:
                raise DimensionError(
                    f"Pretrained vector for '{name}' has length {vector.size}, expected {dim}"
                )
            table[entity_id] = vector
            covered += 1
        metadata["pretrained"] = str(Path(pretrained))
        logger.info(f"EV-init: {covered}/{n_entities} entities from {pretrained}")

    zero = normalize_rows(table)
    while zero.size:
        table[zero] = rng.uniform(-INIT_RANGE, INIT_RANGE, size=(zero.size, dim))
        zero = normalize_rows(table, zero)

    return Model(
        kind=kind,
        entities=EntityEmbeddings(table, projection),
        relations=RelationParams(kind, blocks),
        dim=dim,
        slices=slices,
        metadata=metadata
    )
