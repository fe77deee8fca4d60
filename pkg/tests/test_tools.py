"""
Test Tools - Atomic file output, checkpoints, reports and vector exports
"""

import hashlib
import sys
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

# Add parent directory to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from kb import Vocabulary
from models import load_pretrained_vectors, relation_block_shapes, score_batch
from rules import RuleCandidate
from tools import atomic_write_text, describe_file, file_digest, list_files, read_text
from tools.checkpoint import (
    CheckpointError,
    VocabularyMismatchError,
    load_checkpoint,
    read_header,
    save_checkpoint,
)
from tools.report_tools import (
    export_entities,
    export_relations,
    format_rule,
    unseen_predictions,
    write_precision_curve,
    write_rules,
)
from trainer import AdaGradState
from tests.helpers import make_store

DIGEST = "0" * 64


class TestFileTools:
    """Tests for atomic writes and digests"""

    def test_write_and_read(self, temp_dir):
        """Test text is written without newline translation"""
        path = atomic_write_text(Path(temp_dir) / "sub" / "a.txt", "x\r\ny\n")
        assert read_text(path) == "x\r\ny\n"

    def test_no_temp_files_left(self, temp_dir):
        """Test the temp file is renamed away"""
        atomic_write_text(Path(temp_dir) / "a.txt", "one")
        atomic_write_text(Path(temp_dir) / "a.txt", "two")
        assert [Path(p).name for p in Path(temp_dir).iterdir()] == ["a.txt"]
        assert read_text(Path(temp_dir) / "a.txt") == "two"

    def test_read_missing(self, temp_dir):
        """Test reading a missing file raises"""
        with pytest.raises(FileNotFoundError):
            read_text(Path(temp_dir) / "missing.txt")

    def test_digest(self, temp_dir):
        """Test the digest is SHA-256 of the bytes"""
        path = atomic_write_text(Path(temp_dir) / "a.txt", "hello\n")
        assert file_digest(path) == hashlib.sha256(b"hello\n").hexdigest()

    def test_describe_file(self, temp_dir):
        """Test file descriptions for present and absent files"""
        path = atomic_write_text(Path(temp_dir) / "a.txt", "abc")
        info = describe_file(path)
        assert info["exists"] and info["size"] == 3
        assert info["sha256"] == file_digest(path)
        assert describe_file(Path(temp_dir) / "nope")["exists"] is False

    def test_list_files(self, temp_dir):
        """Test listing skips temp files and applies the pattern"""
        atomic_write_text(Path(temp_dir) / "b.ckpt", "")
        atomic_write_text(Path(temp_dir) / "a.ckpt", "")
        atomic_write_text(Path(temp_dir) / "c.csv", "")
        (Path(temp_dir) / ".tmp_x.ckpt").write_text("partial")
        names = [Path(p).name for p in list_files(temp_dir, "*.ckpt")]
        assert names == ["a.ckpt", "b.ckpt"]
        assert list_files(Path(temp_dir) / "missing") == []


class TestCheckpoint:
    """Tests for the checkpoint codec"""

    def test_round_trip(self, temp_dir, random_model_factory, any_kind):
        """Test parameters, accumulators and metadata survive exactly"""
        model = random_model_factory(any_kind, projection="tanh")
        state = AdaGradState.for_model(model)
        for _, acc in state.items():
            acc += np.random.default_rng(0).uniform(size=acc.shape)
        state.steps = 12
        path = Path(temp_dir) / "model.ckpt"

        digest = save_checkpoint(path, model, DIGEST, state, meta={"epoch": 3})
        loaded = load_checkpoint(path, DIGEST)

        assert loaded.digest == digest == file_digest(path)
        assert loaded.header.meta["epoch"] == "3"
        assert loaded.model.kind is model.kind
        assert loaded.model.projection is model.projection
        for (name, a), (_, b) in zip(model.parameters(), loaded.model.parameters()):
            np.testing.assert_array_equal(a, b, err_msg=name)
        assert loaded.state.steps == 12
        for name, acc in state.items():
            np.testing.assert_array_equal(acc, loaded.state[name])

        triples = np.array([[0, 1, 2], [3, 0, 5], [4, 2, 1]])
        np.testing.assert_array_equal(score_batch(model, triples), score_batch(loaded.model, triples))

    def test_without_state(self, temp_dir, random_model_factory):
        """Test a checkpoint without optimizer state"""
        path = Path(temp_dir) / "model.ckpt"
        save_checkpoint(path, random_model_factory("transe"), DIGEST)
        assert load_checkpoint(path).state is None

    def test_header(self, temp_dir, random_model_factory):
        """Test the header lists every block"""
        model = random_model_factory("ntn", dim=3)
        path = Path(temp_dir) / "model.ckpt"
        save_checkpoint(path, model, DIGEST)
        header = read_header(path)
        assert header.n_entities == 6 and header.n_relations == 3 and header.dim == 3
        shapes = relation_block_shapes("ntn", 3, model.slices)
        assert header.blocks == [("entity", (6, 3))] + [(f"relation/{n}", (3,) + s) for n, s in shapes.items()]
        assert Path(path).read_bytes().startswith(b"kbembed-checkpoint 1\n")

    def test_vocabulary_mismatch(self, temp_dir, random_model_factory):
        """Test a foreign vocabulary digest is refused"""
        path = Path(temp_dir) / "model.ckpt"
        save_checkpoint(path, random_model_factory("distmult"), DIGEST)
        with pytest.raises(VocabularyMismatchError):
            load_checkpoint(path, "1" * 64)

    def test_truncated(self, temp_dir, random_model_factory):
        """Test a cut-off body is detected"""
        path = Path(temp_dir) / "model.ckpt"
        save_checkpoint(path, random_model_factory("bilinear"), DIGEST)
        Path(path).write_bytes(Path(path).read_bytes()[:-8])
        with pytest.raises(CheckpointError, match="truncated"):
            load_checkpoint(path)

    def test_trailing_bytes(self, temp_dir, random_model_factory):
        """Test extra bytes after the last block are detected"""
        path = Path(temp_dir) / "model.ckpt"
        save_checkpoint(path, random_model_factory("bilinear"), DIGEST)
        Path(path).write_bytes(Path(path).read_bytes() + b"\x00" * 8)
        with pytest.raises(CheckpointError):
            load_checkpoint(path)

    def test_not_a_checkpoint(self, temp_dir):
        """Test other files are rejected"""
        path = Path(temp_dir) / "model.ckpt"
        path.write_text("hello\nend\n")
        with pytest.raises(CheckpointError):
            load_checkpoint(path)


class TestReports:
    """Tests for rule listings and prediction files"""

    def setup_method(self):
        self.vocab = Vocabulary(["a", "b", "c"], ["born_in", "city_of", "nationality", "lives_in"])

    def test_format_rule_length_2(self):
        """Test B1(a,b) & B2(b,c) => H(a,c)"""
        assert format_rule(2, (0, 1), self.vocab) == "born_in(a,b) & city_of(b,c) => nationality(a,c)"

    def test_format_rule_length_3(self):
        """Test three atoms end in variable d"""
        text = format_rule(3, (0, 1, 2), self.vocab)
        assert text == "born_in(a,b) & city_of(b,c) & nationality(c,d) => lives_in(a,d)"

    def test_write_rules(self, temp_dir):
        """Test one tab-separated line per rule"""
        rule = RuleCandidate(head=2, body=(0, 1), distance=0.25, n_predictions=4, confidence=0.75)
        path = write_rules(Path(temp_dir) / "rules.tsv", [rule], self.vocab)
        assert read_text(path) == "born_in(a,b) & city_of(b,c) => nationality(a,c)\t0.25\t0.75\t4\n"

    def test_unseen_predictions(self):
        """Test seen triples are dropped and repeats kept once, in first-seen order"""
        store = make_store([(0, 0, 1)], valid=[(1, 0, 2)], n_entities=4, n_relations=2)
        first = RuleCandidate(0, (1, 1), 0.0, predictions=np.array([[3, 0, 2], [0, 0, 1], [2, 0, 3]]))
        second = RuleCandidate(0, (1, 1), 0.0, predictions=np.array([[1, 0, 2], [3, 0, 2], [0, 0, 0]]))
        assert unseen_predictions([first, second], store).tolist() == [[3, 0, 2], [2, 0, 3], [0, 0, 0]]

    def test_precision_curve_file(self, temp_dir):
        """Test the curve is written as predictions,precision"""
        path = write_precision_curve(Path(temp_dir) / "precision.csv", [(10, 0.7), (25, 0.5)])
        frame = pd.read_csv(path)
        assert list(frame.columns) == ["predictions", "precision"]
        assert frame["predictions"].tolist() == [10, 25]


class TestExport:
    """Tests for vector exports"""

    def test_entities_reimport(self, temp_dir, random_model_factory):
        """Test exported entity vectors read back exactly"""
        model = random_model_factory("distmult")
        vocab = Vocabulary([f"e{i}" for i in range(6)], ["r0", "r1", "r2"])
        path = export_entities(Path(temp_dir) / "entity_vectors.txt", model, vocab)
        vectors = load_pretrained_vectors(str(path))
        assert list(vectors) == vocab.entity_names
        np.testing.assert_array_equal(np.stack(list(vectors.values())), model.entities.table)

    @pytest.mark.parametrize("kind,width", [
        ("transe", 4), ("distmult", 4), ("bilinear", 16), ("bilinear-linear", 24), ("ntn", 4 * 16 + 2 * 4 * 4 + 4),
    ])
    def test_relation_layout(self, temp_dir, random_model_factory, kind, width):
        """Test one line per relation with the blocks flattened in storage order"""
        model = random_model_factory(kind, dim=4)
        vocab = Vocabulary([f"e{i}" for i in range(6)], ["r0", "r1", "r2"])
        lines = read_text(export_relations(Path(temp_dir) / "relation_vectors.txt", model, vocab)).splitlines()
        assert len(lines) == 3
        fields = lines[1].split(" ")
        assert fields[0] == "r1"
        assert len(fields) == 1 + width
        first_block = next(iter(model.relations.blocks.values()))[1].ravel()
        np.testing.assert_array_equal(np.asarray(fields[1:1 + first_block.size], dtype=float), first_block)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
