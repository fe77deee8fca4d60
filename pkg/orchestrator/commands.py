"""
Commands - prepare / train / eval / rules / export / run.

Each command takes a validated RunConfig and an optional TelemetryLogger;
main.py owns argument parsing, console output and exit codes.
"""

import logging
from pathlib import Path
from typing import Dict, List, Optional

import pandas as pd

from config import ConfigError, RunConfig
from kb import TripleStore, Vocabulary, save_triples
from logging_system.telemetry import MANIFEST_FILE, TelemetryLogger, check_drift, load_manifest
from models import CapabilityError
from tools.checkpoint import Checkpoint, load_checkpoint
from tools.report_tools import export_entities, export_relations, write_frame

from .graph import VOCAB_DIR, EpochListener, PipelineGraph, build_store, dataset_paths
from .state import PipelineState, Stage, create_initial_state

logger = logging.getLogger(__name__)

ENTITY_VECTORS = "entity_vectors.txt"
RELATION_VECTORS = "relation_vectors.txt"


def _start(telemetry: Optional[TelemetryLogger], config: Optional[RunConfig], command: str) -> None:
    if telemetry is None:
        return
    if config is not None:
        telemetry.set_config(config.to_manifest(), seed=config.seed)
    telemetry.log_event("run_started", {"command": command})


def _run_pipeline(
    config: RunConfig,
    stages: List[Stage],
    telemetry: Optional[TelemetryLogger],
    on_epoch: Optional[EpochListener] = None,
    **initial
) -> PipelineState:
    graph = PipelineGraph(config, telemetry=telemetry, on_epoch=on_epoch)
    return graph.run(create_initial_state(config, stages, **initial))


def _require_composable(config: RunConfig) -> None:
    if not config.kind.composable:
        raise ConfigError("mine_rules", f"rule mining needs a composable model, got {config.model}")


def _load_for_store(checkpoint: str, store: TripleStore) -> Checkpoint:
    """Load a checkpoint that must have been trained on the store's vocabulary."""
    loaded = load_checkpoint(checkpoint, vocab_digest=store.vocab.digest())
    logger.info(f"Loaded {loaded.header.kind.value} checkpoint {checkpoint} (sha256 {loaded.digest[:12]})")
    return loaded


def find_manifest(checkpoint: str) -> Optional[Path]:
    """manifest.json in the checkpoint's directory or its parent (periodic checkpoints)."""
    directory = Path(checkpoint).resolve().parent
    for candidate in (directory, directory.parent):
        if (candidate / MANIFEST_FILE).is_file():
            return candidate / MANIFEST_FILE
    return None


def check_dataset_drift(
    checkpoint: str,
    config: RunConfig,
    telemetry: Optional[TelemetryLogger] = None
) -> List[str]:
    """
    Compare dataset digests with the manifest of the run that produced the checkpoint.

    Returns:
        Names of drifted splits (empty when no manifest is found)
    """
    manifest_path = find_manifest(checkpoint)
    if manifest_path is None:
        logger.debug(f"No manifest next to {checkpoint}; skipping drift check")
        return []
    drifted = check_drift(load_manifest(str(manifest_path)), dataset_paths(config))
    if drifted:
        logger.warning(f"Dataset drift since {manifest_path}: {', '.join(drifted)}")
        if telemetry:
            telemetry.log_event("dataset_drift", {"manifest": str(manifest_path), "splits": drifted})
    return drifted


def cmd_prepare(config: RunConfig, telemetry: Optional[TelemetryLogger] = None) -> Dict[str, str]:
    """
    Filter and augment the dataset, then write prepared splits, vocabulary and statistics.

    Returns:
        Mapping of output kind -> path
    """
    _start(telemetry, config, "prepare")
    store = build_store(config)
    out = Path(config.output_dir)

    outputs = {}
    for name in ("train", "valid", "test"):
        if name == "train" or len(store.split(name)):
            outputs[name] = str(save_triples(out / f"{name}.txt", store.split(name), store.vocab))
    outputs["vocab"] = str(store.vocab.save(str(out / VOCAB_DIR)))

    stats = store.stats()
    frame = pd.DataFrame({"statistic": list(stats), "value": list(stats.values())})
    outputs["stats"] = str(write_frame(out / "stats.csv", frame))

    if telemetry:
        telemetry.record_datasets(dataset_paths(config))
        telemetry.set_dataset_stats(stats)
        for name, path in outputs.items():
            telemetry.record_output(name, path)
    logger.info(f"Prepared dataset written to {out}")
    return outputs


def cmd_train(
    config: RunConfig,
    telemetry: Optional[TelemetryLogger] = None,
    on_epoch: Optional[EpochListener] = None,
    resume: Optional[str] = None
) -> PipelineState:
    """
    Train a model and write model.ckpt, history.csv and vocab/.

    Args:
        config: Validated run configuration
        telemetry: Telemetry logger instance
        on_epoch: Progress callback
        resume: Checkpoint to continue from; training stops at config.epochs in total
    """
    _start(telemetry, config, "train")
    if not resume:
        return _run_pipeline(config, [Stage.TRAIN], telemetry, on_epoch)

    store = build_store(config)
    loaded = _load_for_store(resume, store)
    start_epoch = int(loaded.header.meta.get("epoch", 0))
    if telemetry:
        telemetry.log_event("resumed", {"checkpoint": resume, "epoch": start_epoch})
    return _run_pipeline(
        config, [Stage.TRAIN], telemetry, on_epoch,
        model=loaded.model, adagrad=loaded.state, start_epoch=start_epoch, store=store,
    )


def cmd_eval(
    config: RunConfig,
    checkpoint: str,
    telemetry: Optional[TelemetryLogger] = None
) -> PipelineState:
    """
    Evaluate a checkpoint on the test split.

    Raises:
        VocabularyMismatchError: Checkpoint trained on a different vocabulary
    """
    _start(telemetry, config, "eval")
    store = build_store(config)
    loaded = _load_for_store(checkpoint, store)
    check_dataset_drift(checkpoint, config, telemetry)
    return _run_pipeline(config, [Stage.EVALUATE], telemetry, model=loaded.model, store=store)


def cmd_rules(
    config: RunConfig,
    checkpoint: str,
    telemetry: Optional[TelemetryLogger] = None
) -> PipelineState:
    """
    Mine rules from a checkpoint's relation embeddings.

    Raises:
        CapabilityError: The checkpoint holds a non-composable model (NTN, bilinear-linear)
    """
    _start(telemetry, config, "rules")
    store = build_store(config)
    loaded = _load_for_store(checkpoint, store)
    if not loaded.model.kind.composable:
        raise CapabilityError(f"Rule mining needs a composable model, got {loaded.model.kind.value}")
    return _run_pipeline(config, [Stage.MINE_RULES], telemetry, model=loaded.model, store=store)


def cmd_export(
    checkpoint: str,
    output_dir: str,
    entities: bool = True,
    relations: bool = True,
    vocab_dir: Optional[str] = None,
    telemetry: Optional[TelemetryLogger] = None
) -> Dict[str, str]:
    """
    Write entity and/or relation vectors as "token v1 ... vn" lines.

    Args:
        checkpoint: Checkpoint file
        output_dir: Directory receiving the vector files
        entities: Export entity vectors
        relations: Export relation parameters
        vocab_dir: Vocabulary directory (default: vocab/ next to the checkpoint)
    """
    _start(telemetry, None, "export")
    if vocab_dir is None:
        manifest = find_manifest(checkpoint)
        base = manifest.parent if manifest else Path(checkpoint).resolve().parent
        vocab_dir = str(base / VOCAB_DIR)
    vocab = Vocabulary.load(vocab_dir)
    loaded = load_checkpoint(checkpoint, vocab_digest=vocab.digest())

    out = Path(output_dir)
    outputs = {}
    if entities:
        outputs["entities"] = str(export_entities(str(out / ENTITY_VECTORS), loaded.model, vocab))
    if relations:
        outputs["relations"] = str(export_relations(str(out / RELATION_VECTORS), loaded.model, vocab))

    if telemetry:
        for name, path in outputs.items():
            telemetry.record_output(name, path)
    logger.info(f"Exported {', '.join(outputs) or 'nothing'} to {out}")
    return outputs


def cmd_run(
    config: RunConfig,
    telemetry: Optional[TelemetryLogger] = None,
    on_epoch: Optional[EpochListener] = None
) -> PipelineState:
    """Train, evaluate on test and (when mine_rules is set) mine rules in one pipeline."""
    if config.mine_rules:
        _require_composable(config)
    _start(telemetry, config, "run")
    stages = [Stage.TRAIN, Stage.EVALUATE]
    if config.mine_rules:
        stages.append(Stage.MINE_RULES)
    return _run_pipeline(config, stages, telemetry, on_epoch)

