"""
Pytest Configuration and Shared Fixtures
"""

import os
import shutil
import sys
import tempfile
from pathlib import Path
from typing import Dict, Generator

import numpy as np
import pytest

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from kb import TripleStore
from models import ModelKind, init_model
from tests.helpers import make_store, write_triples


# ============================================================================
# ENVIRONMENT FIXTURES
# ============================================================================

@pytest.fixture(scope="session")
def project_root() -> Path:
    """Get the project root directory."""
    return Path(__file__).parent.parent


@pytest.fixture(autouse=True)
def isolated_toolkit_config():
    """Reset the process-wide configuration around every test."""
    import config
    config.set_config(None)
    yield
    config.set_config(None)


# ============================================================================
# TEMPORARY DIRECTORY FIXTURES
# ============================================================================

@pytest.fixture
def temp_dir() -> Generator[str, None, None]:
    """Create a temporary directory for tests."""
    dir_path = tempfile.mkdtemp()
    yield dir_path
    if os.path.exists(dir_path):
        shutil.rmtree(dir_path)


# ============================================================================
# KNOWLEDGE BASE FIXTURES
# ============================================================================

TOY_TRAIN = [
    ("alice", "born_in", "paris"),
    ("bob", "born_in", "lyon"),
    ("carol", "born_in", "paris"),
    ("paris", "city_of", "france"),
    ("lyon", "city_of", "france"),
    ("berlin", "city_of", "germany"),
    ("alice", "nationality", "france"),
    ("bob", "nationality", "france"),
    ("dave", "born_in", "berlin"),
    ("dave", "nationality", "germany"),
    ("alice", "knows", "bob"),
    ("bob", "knows", "carol"),
]
TOY_VALID = [
    ("carol", "knows", "alice"),
]
TOY_TEST = [
    ("carol", "nationality", "france"),
    ("dave", "knows", "alice"),
]


@pytest.fixture
def toy_files(temp_dir) -> Dict[str, str]:
    """Train / valid / test files of a small geography KB."""
    base = Path(temp_dir) / "data"
    return {
        "train": write_triples(base / "train.txt", TOY_TRAIN),
        "valid": write_triples(base / "valid.txt", TOY_VALID),
        "test": write_triples(base / "test.txt", TOY_TEST),
    }


@pytest.fixture
def small_store() -> TripleStore:
    """Five entities, two relations, a chain r0 then r1."""
    return make_store(
        train=[(0, 0, 1), (1, 1, 2), (3, 0, 1), (0, 1, 4), (2, 0, 3)],
        valid=[(4, 0, 1)],
        test=[(3, 1, 2), (0, 0, 3)],
        n_entities=5,
        n_relations=2,
    )


@pytest.fixture(params=[kind.value for kind in ModelKind])
def any_kind(request) -> str:
    """Every model kind."""
    return request.param


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def random_model_factory():
    """Build a randomly initialized model with relation blocks scaled up."""
    def build(kind, n_entities=6, n_relations=3, dim=4, seed=0, projection="linear", scale=5.0):
        model = init_model(kind, n_entities, n_relations, dim, seed=seed, projection=projection)
        for block in model.relations.blocks.values():
            block *= scale
        return model
    return build
