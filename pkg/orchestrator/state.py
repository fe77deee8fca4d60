"""
Pipeline State - Shared state passed between pipeline stages
"""

from enum import Enum
from typing import Any, Dict, List, Optional, TypedDict

from config import RunConfig
from evaluation import EvalReport
from kb import RelationDomains, TripleStore
from models import Model
from rules import RuleCandidate
from trainer import AdaGradState, TrainHistory


class PipelineStatus(str, Enum):
    """Status of the pipeline"""
    INITIALIZED = "initialized"
    LOADED = "loaded"
    TRAINED = "trained"
    EVALUATED = "evaluated"
    RULES_MINED = "rules_mined"
    SUCCESS = "success"
    FAILED = "failed"
    CANCELLED = "cancelled"


class Stage(str, Enum):
    """Optional stages, in execution order"""
    TRAIN = "train"
    EVALUATE = "evaluate"
    MINE_RULES = "mine_rules"


STAGE_ORDER = [Stage.TRAIN, Stage.EVALUATE, Stage.MINE_RULES]


class PipelineState(TypedDict, total=False):
    """Type definition for graph state."""
    config: RunConfig
    stages: List[str]
    completed: List[str]
    status: str

    store: TripleStore
    domains: RelationDomains
    model: Model
    adagrad: Optional[AdaGradState]
    start_epoch: int

    history: TrainHistory
    reports: Dict[str, EvalReport]
    rules: List[RuleCandidate]
    precision: List[Any]
    outputs: Dict[str, str]


def create_initial_state(
    config: RunConfig,
    stages: List[Stage],
    model: Optional[Model] = None,
    adagrad: Optional[AdaGradState] = None,
    start_epoch: int = 0,
    store: Optional[TripleStore] = None
) -> PipelineState:
    """
    Build the state a pipeline run starts from.

    Args:
        config: Validated run configuration
        stages: Optional stages to execute
        model: Preloaded model (e.g. from a checkpoint); initialized when None
        adagrad: Optimizer state to resume from
        start_epoch: Epochs already completed by the preloaded model
        store: Dataset already loaded by the command (skips loading)
    """
    state: PipelineState = {
        "config": config,
        "stages": [Stage(s).value for s in stages],
        "completed": [],
        "status": PipelineStatus.INITIALIZED.value,
        "adagrad": adagrad,
        "start_epoch": start_epoch,
        "outputs": {},
    }
    if model is not None:
        state["model"] = model
    if store is not None:
        state["store"] = store
    return state
