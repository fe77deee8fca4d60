"""
Orchestrator Module - Pipeline graph and command implementations
Uses LangGraph to run load -> train -> evaluate -> mine rules.
"""

from .graph import PipelineGraph, build_store, load_exclusions
from .state import PipelineState, PipelineStatus, Stage, create_initial_state
from .commands import cmd_prepare, cmd_train, cmd_eval, cmd_rules, cmd_export, cmd_run, check_dataset_drift

__all__ = [
    "PipelineGraph",
    "PipelineState",
    "PipelineStatus",
    "Stage",
    "build_store",
    "load_exclusions",
    "create_initial_state",
    "cmd_prepare",
    "cmd_train",
    "cmd_eval",
    "cmd_rules",
    "cmd_export",
    "cmd_run",
    "check_dataset_drift",
]
