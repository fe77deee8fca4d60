"""
Pipeline Graph - LangGraph workflow: load -> init -> train -> evaluate -> mine rules.
Improvements:
- Proper TypedDict state
- Stages enabled per command
- Periodic checkpoints from epoch callbacks
"""

from __future__ import annotations

import dataclasses
import logging
from pathlib import Path
from typing import Callable, List, Optional

from langgraph.graph import END, StateGraph

from config import RunConfig, get_config
from evaluation import evaluate_modes
from kb import (
    TripleStore,
    UnknownTokenError,
    Vocabulary,
    augment_inverses,
    compute_domains,
    filter_frequent_relations,
    load_dataset,
)
from logging_system.telemetry import TelemetryLogger
from models import CapabilityError, init_model
from rules import count_sequences, embed_rule, precision_curve, prune_relations
from tools.checkpoint import save_checkpoint
from tools.file_tools import read_text
from tools.report_tools import write_eval_report, write_frame, write_precision_curve, write_predictions, write_rules
from trainer import AdaGradState, EpochRecord, train

from .state import STAGE_ORDER, PipelineState, PipelineStatus, Stage

logger = logging.getLogger(__name__)

FINAL_CHECKPOINT = "model.ckpt"
CHECKPOINT_DIR = "checkpoints"
VOCAB_DIR = "vocab"

EpochListener = Callable[[int, EpochRecord], None]


def build_store(config: RunConfig) -> TripleStore:
    """Load the configured splits and apply relation filtering and inverse augmentation."""
    store = load_dataset(
        str(config.train),
        str(config.valid) if config.valid else None,
        str(config.test) if config.test else None,
    )
    if config.min_relation_count > 1:
        store = filter_frequent_relations(store, config.min_relation_count)
    if config.inverse_relations:
        store = augment_inverses(store)
    return store


def dataset_paths(config: RunConfig) -> dict:
    return {
        "train": str(config.train),
        "valid": str(config.valid) if config.valid else None,
        "test": str(config.test) if config.test else None,
    }


def load_exclusions(path: Optional[Path], vocab: Vocabulary) -> List[int]:
    """Relation ids named in a one-name-per-line file; unknown names are skipped with a warning."""
    if path is None:
        return []
    ids = []
    for name in read_text(path).splitlines():
        name = name.strip()
        if not name or name.startswith("#"):
            continue
        try:
            ids.append(vocab.relation_id(name))
        except UnknownTokenError:
            logger.warning(f"Excluded relation '{name}' is not in the vocabulary")
    return ids


class PipelineGraph:
    """
    Runs the enabled stages of a pipeline with LangGraph.
    """

    def __init__(
        self,
        config: RunConfig,
        telemetry: Optional[TelemetryLogger] = None,
        on_epoch: Optional[EpochListener] = None
    ):
        """
        Initialize the pipeline graph.

        Args:
            config: Validated run configuration
            telemetry: Telemetry logger instance
            on_epoch: Called after every training epoch (progress display)
        """
        self.config = config
        self.telemetry = telemetry
        self.on_epoch = on_epoch
        self.output_dir = Path(config.output_dir)
        self.runtime = get_config().runtime
        self.graph = self._build_graph()

    def _build_graph(self):
        """
        Build the LangGraph workflow.

        Returns:
            Compiled workflow graph
        """
        workflow = StateGraph(PipelineState)

        workflow.add_node("load_data", self._load_node)
        workflow.add_node("init_model", self._init_node)
        workflow.add_node(Stage.TRAIN.value, self._train_node)
        workflow.add_node(Stage.EVALUATE.value, self._evaluate_node)
        workflow.add_node(Stage.MINE_RULES.value, self._rules_node)
        workflow.add_node("finalize", self._finalize_node)

        workflow.set_entry_point("load_data")
        workflow.add_edge("load_data", "init_model")

        routes = {stage.value: stage.value for stage in STAGE_ORDER}
        routes["finalize"] = "finalize"
        for source in ["init_model"] + [stage.value for stage in STAGE_ORDER]:
            workflow.add_conditional_edges(source, self._next_stage, routes)

        workflow.add_edge("finalize", END)

        return workflow.compile()

    def run(self, initial_state: PipelineState) -> PipelineState:
        return self.graph.invoke(initial_state)

    def _log(self, event_type: str, details: dict) -> None:
        if self.telemetry:
            self.telemetry.log_event(event_type, details)

    def _record_output(self, state: PipelineState, name: str, path) -> None:
        state["outputs"][name] = str(path)
        if self.telemetry:
            self.telemetry.record_output(name, str(path))

    def _next_stage(self, state: PipelineState) -> str:
        """Next enabled stage not yet completed, or finalize."""
        for stage in STAGE_ORDER:
            if stage.value in state["stages"] and stage.value not in state["completed"]:
                return stage.value
        return "finalize"

    def _complete(self, state: PipelineState, stage: Stage, status: PipelineStatus) -> None:
        state["completed"] = state["completed"] + [stage.value]
        state["status"] = status.value

    def _load_node(self, state: PipelineState) -> PipelineState:
        """Load and preprocess the dataset unless a command already did"""
        store = state.get("store")
        if store is None:
            store = build_store(self.config)
        store.vocab.save(str(self.output_dir / VOCAB_DIR))

        if self.telemetry:
            self.telemetry.record_datasets(dataset_paths(self.config))
            self.telemetry.set_dataset_stats(store.stats())
        self._log("data_loaded", store.stats())

        state["store"] = store
        state["status"] = PipelineStatus.LOADED.value
        return state

    def _init_node(self, state: PipelineState) -> PipelineState:
        """Use the preloaded model or initialize a new one"""
        store = state["store"]
        model = state.get("model")

        if model is not None:
            if model.n_entities != store.n_entities or model.n_relations != store.n_relations:
                raise ValueError(
                    f"Model has {model.n_entities} entities / {model.n_relations} relations, "
                    f"data has {store.n_entities} / {store.n_relations}"
                )
            return state

        config = self.config
        state["model"] = init_model(
            config.kind,
            store.n_entities,
            store.n_relations,
            config.dim,
            seed=config.seed,
            pretrained=str(config.pretrained) if config.pretrained else None,
            entity_names=store.vocab.entity_names,
            projection=config.projection,
            slices=config.slices,
        )
        self._log("model_initialized", {"kind": config.model, "dim": config.dim, "projection": config.projection})
        return state

    def _train_node(self, state: PipelineState) -> PipelineState:
        """Train the model and write checkpoints and history"""
        config = self.config
        store, model = state["store"], state["model"]
        adagrad = state.get("adagrad")
        if adagrad is None:
            adagrad = AdaGradState.for_model(model)
        start_epoch = state.get("start_epoch", 0)
        digest = store.vocab.digest()

        def on_epoch(epoch: int, snapshot, record: EpochRecord) -> None:
            self._log("epoch_completed", record.to_dict())
            if config.checkpoint_every and epoch % config.checkpoint_every == 0:
                path = self.output_dir / CHECKPOINT_DIR / f"epoch_{epoch:04d}.ckpt"
                save_checkpoint(str(path), snapshot, digest, adagrad, {"epoch": epoch})
                self._log("checkpoint_written", {"path": str(path), "epoch": epoch})
            if self.on_epoch:
                self.on_epoch(epoch, record)

        # resumed runs continue up to the configured total
        train_config = config.train_config(self.runtime.chunk_size)
        if start_epoch:
            train_config = dataclasses.replace(train_config, epochs=max(0, train_config.epochs - start_epoch))

        model, history = train(
            model, store, train_config,
            state=adagrad, callbacks=[on_epoch], start_epoch=start_epoch
        )

        history_path = write_frame(self.output_dir / "history.csv", history.to_frame())
        final_epoch = start_epoch + len(history)
        checkpoint_path = self.output_dir / FINAL_CHECKPOINT
        checkpoint_digest = save_checkpoint(str(checkpoint_path), model, digest, adagrad, {"epoch": final_epoch})

        self._record_output(state, "history", history_path)
        self._record_output(state, "checkpoint", checkpoint_path)
        self._log("checkpoint_written", {"path": str(checkpoint_path), "sha256": checkpoint_digest})
        if self.telemetry and len(history):
            self.telemetry.set_metrics("train", {
                "epochs": final_epoch,
                "final_mean_loss": history.epochs[-1].mean_loss,
                "checkpoint_sha256": checkpoint_digest,
            })

        state["model"], state["adagrad"], state["history"] = model, adagrad, history
        self._complete(state, Stage.TRAIN, PipelineStatus.TRAINED)
        return state

    def _evaluate_node(self, state: PipelineState) -> PipelineState:
        """Rank the test split and write metric tables"""
        config = self.config
        store = state["store"]
        if len(store.test) == 0:
            logger.warning("No test triples; skipping evaluation")
            self._complete(state, Stage.EVALUATE, PipelineStatus.EVALUATED)
            return state

        modes = ["raw", "filtered"] if config.eval_mode == "both" else [config.eval_mode]
        reports = evaluate_modes(
            state["model"], store, modes,
            with_map=config.compute_map,
            workers=config.resolved_workers(),
            threshold=config.category_threshold,
        )

        for mode, report in reports.items():
            for name, path in write_eval_report(str(self.output_dir), report, f"_{mode}").items():
                self._record_output(state, f"{name}_{mode}", path)
            if self.telemetry:
                self.telemetry.set_metrics(f"eval_{mode}", {row["metric"]: row["value"] for row in report.to_rows()})
            self._log("evaluation_completed", {"mode": mode, "mrr": report.mrr, "hits@10": report.hits10})

        state["reports"] = reports
        self._complete(state, Stage.EVALUATE, PipelineStatus.EVALUATED)
        return state

    def _rules_node(self, state: PipelineState) -> PipelineState:
        """Mine rules and write rules, predictions and the precision curve"""
        config = self.config
        store, model = state["store"], state["model"]
        if not model.kind.composable:
            raise CapabilityError(f"Rule mining needs a composable model, got {model.kind.value}")

        domains = prune_relations(
            compute_domains(store),
            exclude=load_exclusions(config.rule_exclude, store.vocab),
            drop_singleton_domains=config.drop_singleton_domains,
        )
        if 2 in config.rule_lengths:
            logger.info(f"Length-2 candidate sequences over all heads: {count_sequences(domains, 2)}")

        rules = embed_rule(
            model, store, domains,
            k=config.rule_k,
            delta=config.rule_delta,
            lengths=config.rule_lengths,
            workers=config.resolved_workers(),
        )
        points = precision_curve(rules, store, config.precision_cap)

        self._record_output(state, "rules", write_rules(self.output_dir / "rules.tsv", rules, store.vocab))
        self._record_output(state, "predictions", write_predictions(self.output_dir / "predictions.tsv", rules, store))
        self._record_output(state, "precision", write_precision_curve(self.output_dir / "precision.csv", points))

        summary = {"rules": len(rules), "curve_points": len(points)}
        if points:
            summary["pool"], summary["precision"] = points[-1]
        if self.telemetry:
            self.telemetry.set_metrics("rules", summary)
        self._log("rules_mined", summary)

        state["domains"], state["rules"], state["precision"] = domains, rules, points
        self._complete(state, Stage.MINE_RULES, PipelineStatus.RULES_MINED)
        return state

    def _finalize_node(self, state: PipelineState) -> PipelineState:
        """Mark the run complete"""
        state["status"] = PipelineStatus.SUCCESS.value
        self._log("pipeline_complete", {"stages": state["completed"], "outputs": state["outputs"]})
        return state
