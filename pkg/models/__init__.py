"""
Embedding models: TransE, DistMult, Bilinear, Bilinear+Linear and NTN.
"""

from .kinds import ModelKind, Projection, Slot, relation_block_shapes, DEFAULT_SLICES
from .params import (
    Model,
    EntityEmbeddings,
    RelationParams,
    DimensionError,
    init_model,
    load_pretrained_vectors,
    normalize_rows,
)
from .scoring import (
    TripleGradient,
    project_entity,
    score,
    score_batch,
    score_candidates,
    grad,
    accumulate_gradients,
    new_gradient_buffers,
)
from .composition import (
    CapabilityError,
    compose_relations,
    compose_batch,
    relation_embedding,
    relation_distance,
    relation_distances,
)

__all__ = [
    "ModelKind",
    "Projection",
    "Slot",
    "relation_block_shapes",
    "DEFAULT_SLICES",
    "Model",
    "EntityEmbeddings",
    "RelationParams",
    "DimensionError",
    "init_model",
    "load_pretrained_vectors",
    "normalize_rows",
    "TripleGradient",
    "project_entity",
    "score",
    "score_batch",
    "score_candidates",
    "grad",
    "accumulate_gradients",
    "new_gradient_buffers",
    "CapabilityError",
    "compose_relations",
    "compose_batch",
    "relation_embedding",
    "relation_distance",
    "relation_distances",
]
