"""
Test Orchestrator - Pipeline graph and command implementations
"""

import logging
import sys
from pathlib import Path

import pandas as pd
import pytest

# Add parent directory to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from config import ConfigError, build_run_config
from kb import Vocabulary
from logging_system.telemetry import TelemetryLogger
from models import CapabilityError, init_model
from orchestrator import (
    PipelineGraph,
    PipelineStatus,
    Stage,
    build_store,
    check_dataset_drift,
    cmd_eval,
    cmd_export,
    cmd_prepare,
    cmd_rules,
    cmd_run,
    cmd_train,
    create_initial_state,
    load_exclusions,
)
from tools import file_digest, list_files, read_text
from tools.checkpoint import VocabularyMismatchError, read_header
from tests.helpers import write_triples


def run_config(toy_files, output_dir, **overrides):
    values = {
        "train": toy_files["train"],
        "valid": toy_files["valid"],
        "test": toy_files["test"],
        "output_dir": str(output_dir),
        "model": "distmult",
        "dim": 4,
        "epochs": 2,
        "batches": 2,
        "seed": 3,
    }
    values.update(overrides)
    return build_run_config(values)


class TestPipelineGraph:
    """Tests for PipelineGraph"""

    def test_no_stages(self, toy_files, temp_dir):
        """Test load and init alone reach finalize"""
        config = run_config(toy_files, Path(temp_dir) / "run")
        state = PipelineGraph(config).run(create_initial_state(config, []))
        assert state["status"] == PipelineStatus.SUCCESS.value
        assert state["completed"] == []
        assert state["model"].n_entities == 9
        assert (Path(temp_dir) / "run" / "vocab" / "entities.txt").is_file()

    def test_stage_order(self, toy_files, temp_dir):
        """Test stages run in pipeline order regardless of request order"""
        config = run_config(toy_files, Path(temp_dir) / "run")
        state = PipelineGraph(config).run(create_initial_state(config, [Stage.EVALUATE, Stage.TRAIN]))
        assert state["completed"] == ["train", "evaluate"]
        assert "filtered" in state["reports"]

    def test_preloaded_model_mismatch(self, toy_files, temp_dir):
        """Test a preloaded model must fit the data"""
        config = run_config(toy_files, Path(temp_dir) / "run")
        with pytest.raises(ValueError):
            PipelineGraph(config).run(create_initial_state(config, [], model=init_model("distmult", 3, 1, 4)))

    def test_epoch_listener_and_telemetry(self, toy_files, temp_dir):
        """Test per-epoch callbacks and recorded events"""
        config = run_config(toy_files, Path(temp_dir) / "run", epochs=3)
        telemetry = TelemetryLogger(output_dir=str(Path(temp_dir) / "run"), command="train")
        seen = []
        PipelineGraph(config, telemetry, on_epoch=lambda e, rec: seen.append(e)).run(
            create_initial_state(config, [Stage.TRAIN])
        )
        assert seen == [1, 2, 3]
        events = [e["event_type"] for e in telemetry.data.events]
        assert events.count("epoch_completed") == 3
        assert telemetry.data.metrics["train"]["epochs"] == 3
        assert telemetry.data.dataset_stats["entities"] == 9


class TestTrainCommand:
    """Tests for cmd_train"""

    def test_outputs(self, toy_files, temp_dir):
        """Test model.ckpt, history.csv and vocab/ are written"""
        out = Path(temp_dir) / "run"
        state = cmd_train(run_config(toy_files, out))
        assert state["status"] == "success"
        assert len(state["history"]) == 2
        assert read_header(out / "model.ckpt").meta["epoch"] == "2"
        assert list(pd.read_csv(out / "history.csv")["epoch"]) == [1, 2]
        assert Vocabulary.load(str(out / "vocab")) == state["store"].vocab

    def test_deterministic(self, toy_files, temp_dir):
        """Test equal seeds produce byte-identical checkpoints"""
        a = Path(temp_dir) / "a"
        b = Path(temp_dir) / "b"
        cmd_train(run_config(toy_files, a, model="bilinear"))
        cmd_train(run_config(toy_files, b, model="bilinear"))
        assert file_digest(a / "model.ckpt") == file_digest(b / "model.ckpt")

    def test_periodic_checkpoints(self, toy_files, temp_dir):
        """Test checkpoint_every writes one file per interval"""
        out = Path(temp_dir) / "run"
        cmd_train(run_config(toy_files, out, epochs=4, checkpoint_every=2))
        names = [Path(p).name for p in list_files(out / "checkpoints", "*.ckpt")]
        assert names == ["epoch_0002.ckpt", "epoch_0004.ckpt"]
        assert read_header(out / "checkpoints" / "epoch_0002.ckpt").meta["epoch"] == "2"

    def test_resume(self, toy_files, temp_dir):
        """Test resuming continues to the configured total"""
        first = Path(temp_dir) / "first"
        cmd_train(run_config(toy_files, first, epochs=2))
        second = Path(temp_dir) / "second"
        state = cmd_train(run_config(toy_files, second, epochs=5), resume=str(first / "model.ckpt"))
        assert [r.epoch for r in state["history"].epochs] == [3, 4, 5]
        header = read_header(second / "model.ckpt")
        assert header.meta["epoch"] == "5"
        assert int(header.meta["adagrad_steps"]) == 5 * 2


class TestEvalCommand:
    """Tests for cmd_eval"""

    def test_both_modes(self, toy_files, temp_dir):
        """Test metric tables for raw and filtered"""
        out = Path(temp_dir) / "run"
        cmd_train(run_config(toy_files, out))
        state = cmd_eval(run_config(toy_files, out, eval_mode="both", compute_map=True), str(out / "model.ckpt"))
        assert set(state["reports"]) == {"raw", "filtered"}
        for mode in ("raw", "filtered"):
            metrics = pd.read_csv(out / f"metrics_{mode}.csv")
            assert {"mrr", "hits@10", "map"} <= set(metrics["metric"])
            assert len(pd.read_csv(out / f"categories_{mode}.csv")) == 4
        assert state["reports"]["filtered"].mrr >= state["reports"]["raw"].mrr

    def test_vocabulary_mismatch(self, toy_files, temp_dir):
        """Test a checkpoint trained on other data is refused"""
        out = Path(temp_dir) / "run"
        cmd_train(run_config(toy_files, out))
        other = write_triples(Path(temp_dir) / "other" / "train.txt", [("x", "p", "y"), ("y", "p", "z")])
        config = build_run_config({"train": other, "test": other, "output_dir": str(Path(temp_dir) / "o"), "dim": 4})
        with pytest.raises(VocabularyMismatchError):
            cmd_eval(config, str(out / "model.ckpt"))

    def test_dataset_drift(self, toy_files, temp_dir, caplog):
        """Test edited inputs are reported but evaluation still runs"""
        out = Path(temp_dir) / "run"
        config = run_config(toy_files, out)
        telemetry = TelemetryLogger(output_dir=str(out), command="train")
        cmd_train(config, telemetry)
        telemetry.save()

        # same tokens, different content: vocabulary unchanged, digest changed
        write_triples(toy_files["test"], [("dave", "knows", "alice")])
        with caplog.at_level(logging.WARNING):
            assert check_dataset_drift(str(out / "model.ckpt"), config) == ["test"]
        assert "drift" in caplog.text

        eval_telemetry = TelemetryLogger(output_dir=str(Path(temp_dir) / "eval"), command="eval")
        cmd_eval(config, str(out / "model.ckpt"), eval_telemetry)
        assert "dataset_drift" in [e["event_type"] for e in eval_telemetry.data.events]

    def test_no_manifest(self, toy_files, temp_dir):
        """Test drift checking is skipped without a manifest"""
        out = Path(temp_dir) / "run"
        config = run_config(toy_files, out)
        cmd_train(config)
        assert check_dataset_drift(str(out / "model.ckpt"), config) == []


class TestRulesCommand:
    """Tests for cmd_rules and cmd_run"""

    def test_outputs(self, toy_files, temp_dir):
        """Test rules, predictions and precision files are written"""
        out = Path(temp_dir) / "run"
        cmd_train(run_config(toy_files, out))
        state = cmd_rules(run_config(toy_files, out, rule_delta=1e6), str(out / "model.ckpt"))
        for name in ("rules.tsv", "predictions.tsv", "precision.csv"):
            assert (out / name).is_file()
        assert len(read_text(out / "rules.tsv").splitlines()) == len(state["rules"])

    def test_non_composable_checkpoint(self, toy_files, temp_dir):
        """Test NTN checkpoints cannot mine rules"""
        out = Path(temp_dir) / "run"
        cmd_train(run_config(toy_files, out, model="ntn", epochs=1))
        with pytest.raises(CapabilityError):
            cmd_rules(run_config(toy_files, out, model="ntn"), str(out / "model.ckpt"))

    def test_run_rejects_non_composable(self, toy_files, temp_dir):
        """Test cmd_run fails before training when rules are requested for NTN"""
        out = Path(temp_dir) / "run"
        with pytest.raises(ConfigError):
            cmd_run(run_config(toy_files, out, model="ntn", mine_rules=True))
        assert not (out / "model.ckpt").exists()

    def test_run_all_stages(self, toy_files, temp_dir):
        """Test train, evaluate and mine rules in one pipeline"""
        out = Path(temp_dir) / "run"
        state = cmd_run(run_config(toy_files, out, model="transe", mine_rules=True, rule_delta=1e6))
        assert state["completed"] == ["train", "evaluate", "mine_rules"]
        assert {"checkpoint", "history", "metrics_filtered", "rules", "precision"} <= set(state["outputs"])

    def test_load_exclusions(self, temp_dir, caplog):
        """Test relation names map to ids and unknown names are skipped"""
        vocab = Vocabulary(["a"], ["born_in", "knows"])
        path = Path(temp_dir) / "exclude.txt"
        path.write_text("knows\n# comment\n\nunknown\n", encoding="utf-8")
        with caplog.at_level(logging.WARNING):
            assert load_exclusions(path, vocab) == [1]
        assert "unknown" in caplog.text
        assert load_exclusions(None, vocab) == []


class TestPrepareAndExport:
    """Tests for cmd_prepare and cmd_export"""

    def test_prepare_filtered(self, toy_files, temp_dir):
        """Test relation filtering and inverse augmentation in prepared output"""
        out = Path(temp_dir) / "prep"
        outputs = cmd_prepare(run_config(toy_files, out, min_relation_count=3, inverse_relations=True))
        stats = pd.read_csv(outputs["stats"]).set_index("statistic")["value"]
        # knows has 2 training triples and is dropped; the other 3 get inverses
        assert stats["relations"] == 6
        assert stats["train"] == 20
        assert len(read_text(outputs["train"]).splitlines()) == 20
        assert Vocabulary.load(outputs["vocab"]).n_relations == 6

    def test_build_store_matches_prepare(self, toy_files, temp_dir):
        """Test prepared splits reload into the same store"""
        out = Path(temp_dir) / "prep"
        config = run_config(toy_files, out, min_relation_count=3)
        cmd_prepare(config)
        reloaded = build_store(run_config(
            {"train": str(out / "train.txt"), "valid": None, "test": str(out / "test.txt")}, out
        ))
        store = build_store(config)

        def tokens(s):
            v = s.vocab
            return {(v.entity_names[a], v.relation_names[r], v.entity_names[b]) for a, r, b in s.train.tolist()}

        assert tokens(reloaded) == tokens(store)
        assert sorted(reloaded.vocab.relation_names) == sorted(store.vocab.relation_names)

    def test_export(self, toy_files, temp_dir):
        """Test entity and relation vector files"""
        out = Path(temp_dir) / "run"
        cmd_train(run_config(toy_files, out, model="bilinear"))
        outputs = cmd_export(str(out / "model.ckpt"), str(Path(temp_dir) / "vectors"))
        entity_lines = read_text(outputs["entities"]).splitlines()
        relation_lines = read_text(outputs["relations"]).splitlines()
        assert len(entity_lines) == 9 and len(entity_lines[0].split(" ")) == 1 + 4
        assert len(relation_lines) == 4 and len(relation_lines[0].split(" ")) == 1 + 16
        assert entity_lines[0].startswith("alice ")

    def test_export_entities_only(self, toy_files, temp_dir):
        """Test exporting a single kind"""
        out = Path(temp_dir) / "run"
        cmd_train(run_config(toy_files, out))
        outputs = cmd_export(str(out / "model.ckpt"), str(Path(temp_dir) / "vectors"), relations=False)
        assert list(outputs) == ["entities"]


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
