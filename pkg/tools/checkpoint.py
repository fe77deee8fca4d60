"""
Checkpoint Codec - Plain-text header followed by little-endian float64 blocks.

Layout:
    kbembed-checkpoint 1
    kind <kind>
    dim <d>
    slices <m>
    entities <n_e>
    relations <n_r>
    projection <linear|tanh>
    vocab <sha256 of the vocabulary>
    meta <key> <value>          (zero or more)
    block <name> <dim,dim,...>  (one per array, in body order)
    end
    <body: concatenated arrays, C order, '<f8'>

Optimizer accumulators are stored as blocks named "adagrad/<parameter>".
Files are written atomically, so a checkpoint is either complete or absent.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from models import EntityEmbeddings, Model, ModelKind, Projection, RelationParams
from trainer import AdaGradState
from .file_tools import atomic_write_bytes, file_digest

logger = logging.getLogger(__name__)

MAGIC = "kbembed-checkpoint"
FORMAT_VERSION = 1
BODY_DTYPE = np.dtype("<f8")
HEADER_END = b"\nend\n"
ADAGRAD_PREFIX = "adagrad/"


class CheckpointError(ValueError):
    """Raised for unreadable or inconsistent checkpoint files."""


class VocabularyMismatchError(CheckpointError):
    """Raised when a checkpoint was trained on a different vocabulary."""


@dataclass
class CheckpointHeader:
    kind: ModelKind
    dim: int
    slices: int
    n_entities: int
    n_relations: int
    projection: Projection
    vocab_digest: str
    version: int = FORMAT_VERSION
    meta: Dict[str, str] = field(default_factory=dict)
    blocks: List[Tuple[str, Tuple[int, ...]]] = field(default_factory=list)

    def render(self) -> str:
        lines = [
            f"{MAGIC} {self.version}",
            f"kind {self.kind.value}",
            f"dim {self.dim}",
            f"slices {self.slices}",
            f"entities {self.n_entities}",
            f"relations {self.n_relations}",
            f"projection {self.projection.value}",
            f"vocab {self.vocab_digest}",
        ]
        for key, value in sorted(self.meta.items()):
            if "\n" in str(value) or " " in key:
                raise CheckpointError(f"Metadata entry '{key}' cannot be stored in a header line")
            lines.append(f"meta {key} {value}")
        for name, shape in self.blocks:
            lines.append(f"block {name} {','.join(str(n) for n in shape)}")
        lines.append("end")
        return "\n".join(lines) + "\n"


@dataclass
class Checkpoint:
    header: CheckpointHeader
    model: Model
    state: Optional[AdaGradState]
    digest: str


def _parse_header(text: str, path: str) -> CheckpointHeader:
    lines = text.split("\n")
    first = lines[0].split()
    if len(first) != 2 or first[0] != MAGIC:
        raise CheckpointError(f"{path}: not a checkpoint file")
    if int(first[1]) != FORMAT_VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint version {first[1]}")

    fields: Dict[str, str] = {}
    meta: Dict[str, str] = {}
    blocks: List[Tuple[str, Tuple[int, ...]]] = []
    for line in lines[1:]:
        if line == "end" or not line:
            continue
        key, _, rest = line.partition(" ")
        if key == "meta":
            meta_key, _, value = rest.partition(" ")
            meta[meta_key] = value
        elif key == "block":
            name, _, shape = rest.partition(" ")
            blocks.append((name, tuple(int(n) for n in shape.split(",") if n)))
        else:
            fields[key] = rest

    try:
        return CheckpointHeader(
            kind=ModelKind.parse(fields["kind"]),
            dim=int(fields["dim"]),
            slices=int(fields["slices"]),
            n_entities=int(fields["entities"]),
            n_relations=int(fields["relations"]),
            projection=Projection.parse(fields["projection"]),
            vocab_digest=fields["vocab"],
            meta=meta,
            blocks=blocks,
        )
    except KeyError as e:
        raise CheckpointError(f"{path}: header is missing '{e.args[0]}'") from None


def save_checkpoint(
    path: str,
    model: Model,
    vocab_digest: str,
    state: Optional[AdaGradState] = None,
    meta: Optional[Dict[str, str]] = None
) -> str:
    """
    Write a model (and optionally its AdaGrad accumulators).

    Args:
        path: Destination file
        model: Model to store
        vocab_digest: Vocabulary.digest() of the data the model was trained on
        state: Optional optimizer state
        meta: Extra header entries (e.g. epoch)

    Returns:
        SHA-256 digest of the written file
    """
    arrays: List[Tuple[str, np.ndarray]] = list(model.parameters())
    if state is not None:
        arrays += [(ADAGRAD_PREFIX + name, acc) for name, acc in state.items()]
        meta = dict(meta or {}, adagrad_steps=str(state.steps))

    all_meta = dict(model.metadata)
    all_meta.update({k: str(v) for k, v in (meta or {}).items()})

    header = CheckpointHeader(
        kind=model.kind,
        dim=model.dim,
        slices=model.slices,
        n_entities=model.n_entities,
        n_relations=model.n_relations,
        projection=model.projection,
        vocab_digest=vocab_digest,
        meta=all_meta,
        blocks=[(name, tuple(array.shape)) for name, array in arrays],
    )

    body = b"".join(np.ascontiguousarray(array, dtype=BODY_DTYPE).tobytes() for _, array in arrays)
    atomic_write_bytes(path, header.render().encode("ascii") + body)
    digest = file_digest(path)
    logger.debug(f"Checkpoint written to {path} ({len(arrays)} block(s), sha256 {digest[:12]})")
    return digest


def read_header(path: str) -> CheckpointHeader:
    """Parse only the header of a checkpoint."""
    with open(path, 'rb') as f:
        content = f.read()
    end = content.find(HEADER_END)
    if end < 0:
        raise CheckpointError(f"{path}: header terminator not found")
    return _parse_header(content[:end].decode("ascii"), str(path))


def load_checkpoint(path: str, vocab_digest: Optional[str] = None) -> Checkpoint:
    """
    Read a checkpoint written by save_checkpoint.

    Args:
        path: Checkpoint file
        vocab_digest: When given, must equal the stored vocabulary digest

    Returns:
        Checkpoint with the model, optional AdaGrad state and file digest

    Raises:
        CheckpointError: Malformed file
        VocabularyMismatchError: Digest differs from vocab_digest
    """
    path = str(Path(path))
    with open(path, 'rb') as f:
        content = f.read()
    end = content.find(HEADER_END)
    if end < 0:
        raise CheckpointError(f"{path}: header terminator not found")
    header = _parse_header(content[:end].decode("ascii"), path)

    if vocab_digest is not None and vocab_digest != header.vocab_digest:
        raise VocabularyMismatchError(
            f"{path}: checkpoint vocabulary {header.vocab_digest[:12]} does not match data vocabulary {vocab_digest[:12]}"
        )

    body = memoryview(content)[end + len(HEADER_END):]
    offset = 0
    arrays: Dict[str, np.ndarray] = {}
    for name, shape in header.blocks:
        count = int(np.prod(shape, dtype=np.int64))
        size = count * BODY_DTYPE.itemsize
        if offset + size > len(body):
            raise CheckpointError(f"{path}: body truncated in block '{name}'")
        arrays[name] = np.frombuffer(body[offset:offset + size], dtype=BODY_DTYPE).reshape(shape).astype(np.float64)
        offset += size
    if offset != len(body):
        raise CheckpointError(f"{path}: {len(body) - offset} trailing byte(s) after the last block")

    if "entity" not in arrays:
        raise CheckpointError(f"{path}: missing entity block")

    meta = dict(header.meta)
    steps = int(meta.pop("adagrad_steps", 0))
    relation_blocks = {
        name[len("relation/"):]: array for name, array in arrays.items() if name.startswith("relation/")
    }
    try:
        model = Model(
            kind=header.kind,
            entities=EntityEmbeddings(arrays["entity"], header.projection),
            relations=RelationParams(header.kind, relation_blocks),
            dim=header.dim,
            slices=header.slices,
            metadata={k: v for k, v in meta.items() if k == "pretrained"},
        )
    except ValueError as e:
        raise CheckpointError(f"{path}: {e}") from e

    accumulators = {
        name[len(ADAGRAD_PREFIX):]: array for name, array in arrays.items() if name.startswith(ADAGRAD_PREFIX)
    }
    state = AdaGradState(accumulators, steps=steps) if accumulators else None

    return Checkpoint(header=header, model=model, state=state, digest=file_digest(path))
