"""
Vocabulary - Dense integer ids for entity and relation tokens.

Ids are assigned in first-appearance order and never reused, so a dataset
ingested in the same order always yields the same id assignment.
"""

import hashlib
import logging
from pathlib import Path
from typing import Dict, Iterable, List, Optional

from tools.file_tools import atomic_write_text, read_text

logger = logging.getLogger(__name__)

ENTITY_FILE = "entities.txt"
RELATION_FILE = "relations.txt"


class UnknownTokenError(LookupError):
    """Raised when a token is not part of a fixed vocabulary."""

    def __init__(self, kind: str, token: str):
        self.kind = kind
        self.token = token
        super().__init__(f"Unknown {kind} token: '{token}'")


class Vocabulary:
    """
    Bidirectional token <-> id mapping for entities and relations.
    """

    def __init__(
        self,
        entity_names: Optional[Iterable[str]] = None,
        relation_names: Optional[Iterable[str]] = None
    ):
        self.entity_names: List[str] = []
        self.relation_names: List[str] = []
        self._entity_ids: Dict[str, int] = {}
        self._relation_ids: Dict[str, int] = {}

        for name in entity_names or []:
            self.add_entity(name)
        for name in relation_names or []:
            self.add_relation(name)

    @property
    def n_entities(self) -> int:
        return len(self.entity_names)

    @property
    def n_relations(self) -> int:
        return len(self.relation_names)

    def add_entity(self, name: str) -> int:
        """Return the id of an entity, assigning the next id if it is new."""
        entity_id = self._entity_ids.get(name)
        if entity_id is None:
            entity_id = len(self.entity_names)
            self.entity_names.append(name)
            self._entity_ids[name] = entity_id
        return entity_id

    def add_relation(self, name: str) -> int:
        """Return the id of a relation, assigning the next id if it is new."""
        relation_id = self._relation_ids.get(name)
        if relation_id is None:
            relation_id = len(self.relation_names)
            self.relation_names.append(name)
            self._relation_ids[name] = relation_id
        return relation_id

    def entity_id(self, name: str) -> int:
        try:
            return self._entity_ids[name]
        except KeyError:
            raise UnknownTokenError("entity", name) from None

    def relation_id(self, name: str) -> int:
        try:
            return self._relation_ids[name]
        except KeyError:
            raise UnknownTokenError("relation", name) from None

    def has_entity(self, name: str) -> bool:
        return name in self._entity_ids

    def has_relation(self, name: str) -> bool:
        return name in self._relation_ids

    def entity_name(self, entity_id: int) -> str:
        return self.entity_names[entity_id]

    def relation_name(self, relation_id: int) -> str:
        return self.relation_names[relation_id]

    def copy(self) -> "Vocabulary":
        return Vocabulary(self.entity_names, self.relation_names)

    def digest(self) -> str:
        """SHA-256 over both token lists; equal digests mean equal id assignment."""
        sha = hashlib.sha256()
        sha.update(f"entities:{self.n_entities}\n".encode("utf-8"))
        for name in self.entity_names:
            sha.update(name.encode("utf-8") + b"\n")
        sha.update(f"relations:{self.n_relations}\n".encode("utf-8"))
        for name in self.relation_names:
            sha.update(name.encode("utf-8") + b"\n")
        return sha.hexdigest()

    def save(self, directory: str) -> Path:
        """
        Write entities.txt and relations.txt (one token per line, line number = id).

        Args:
            directory: Target directory, created if missing

        Returns:
            Path: The directory written to
        """
        out_dir = Path(directory)
        out_dir.mkdir(parents=True, exist_ok=True)
        atomic_write_text(out_dir / ENTITY_FILE, "".join(f"{n}\n" for n in self.entity_names))
        atomic_write_text(out_dir / RELATION_FILE, "".join(f"{n}\n" for n in self.relation_names))
        logger.debug(f"Vocabulary saved to {out_dir} ({self.n_entities} entities, {self.n_relations} relations)")
        return out_dir

    @classmethod
    def load(cls, directory: str) -> "Vocabulary":
        """Read a vocabulary written by save()."""
        in_dir = Path(directory)
        entities = read_text(in_dir / ENTITY_FILE).split("\n")[:-1]
        relations = read_text(in_dir / RELATION_FILE).split("\n")[:-1]
        vocab = cls(entities, relations)
        if vocab.n_entities != len(entities) or vocab.n_relations != len(relations):
            raise ValueError(f"Vocabulary files in {in_dir} contain repeated tokens")
        return vocab

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Vocabulary):
            return NotImplemented
        return (self.entity_names == other.entity_names
                and self.relation_names == other.relation_names)

    def __repr__(self) -> str:
        return f"Vocabulary(entities={self.n_entities}, relations={self.n_relations})"
