"""
Configuration Module - Process settings, hyperparameter presets and run files.

Process-wide settings (telemetry, worker threads) come from the environment.
Run files are "key = value" lines with '#' comments; a `preset` key pulls in
a named hyperparameter set and explicit keys override it.
"""

import logging
import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from models import ModelKind, Projection
from trainer import TrainConfig

logger = logging.getLogger(__name__)

# a comment starts a line or follows whitespace; "data/run#1" keeps its "#"
COMMENT_PATTERN = re.compile(r"(^|\s)#.*$")


@dataclass
class TelemetryConfig:
    """Configuration for telemetry and logging."""
    log_dir: Path = field(default_factory=lambda: Path.cwd() / "logs")
    auto_save_interval: int = 10
    verbose: bool = False
    log_level: str = "INFO"


@dataclass
class RuntimeConfig:
    """Configuration for numerical work."""
    workers: int = 1
    chunk_size: int = 256


@dataclass
class ToolkitConfig:
    """Master process configuration."""
    telemetry: TelemetryConfig = field(default_factory=TelemetryConfig)
    runtime: RuntimeConfig = field(default_factory=RuntimeConfig)

    @classmethod
    def from_env(cls) -> "ToolkitConfig":
        """Create configuration from environment variables."""
        config = cls()

        if os.getenv("KBE_LOG_DIR"):
            config.telemetry.log_dir = Path(os.getenv("KBE_LOG_DIR"))
        if os.getenv("KBE_VERBOSE"):
            config.telemetry.verbose = os.getenv("KBE_VERBOSE").lower() == "true"
        if os.getenv("KBE_LOG_LEVEL"):
            config.telemetry.log_level = os.getenv("KBE_LOG_LEVEL").upper()
        if os.getenv("KBE_WORKERS"):
            config.runtime.workers = max(1, int(os.getenv("KBE_WORKERS")))
        if os.getenv("KBE_CHUNK_SIZE"):
            config.runtime.chunk_size = max(1, int(os.getenv("KBE_CHUNK_SIZE")))

        return config


# Global default configuration
_default_config: Optional[ToolkitConfig] = None


def get_config() -> ToolkitConfig:
    """Get the global configuration instance."""
    global _default_config
    if _default_config is None:
        _default_config = ToolkitConfig.from_env()
    return _default_config


def set_config(config: Optional[ToolkitConfig]) -> None:
    """Set the global configuration instance (None re-reads the environment on next use)."""
    global _default_config
    _default_config = config


class ConfigError(ValueError):
    """Raised for an invalid run configuration; names the offending key."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


_FB15K = {
    "dim": 100,
    "epochs": 100,
    "batches": 10,
    "l2": 1e-4,
    "learning_rate": 0.1,
}

PRESETS: Dict[str, Dict[str, Any]] = {
    "fb15k-default": dict(_FB15K),
    "fb15k-401-default": dict(_FB15K, min_relation_count=100),
    "wn-default": dict(_FB15K, epochs=300),
}

PATH_KEYS = ("train", "valid", "test", "pretrained", "rule_exclude")


class RunConfig(BaseModel):
    """Validated settings for one train / eval / rules run."""
    model_config = ConfigDict(extra="forbid", protected_namespaces=())

    preset: Optional[str] = None

    # data
    train: Path
    valid: Optional[Path] = None
    test: Optional[Path] = None
    output_dir: Path = Path("runs/default")
    min_relation_count: int = Field(1, ge=1)
    inverse_relations: bool = False

    # model
    model: str = ModelKind.DISTMULT.value
    dim: int = Field(100, ge=1)
    slices: int = Field(4, ge=1)
    projection: str = Projection.LINEAR.value
    pretrained: Optional[Path] = None

    # training
    epochs: int = Field(100, ge=0)
    batches: int = Field(10, ge=1)
    learning_rate: float = Field(0.1, ge=0)
    margin: float = Field(1.0, gt=0)
    l2: float = Field(1e-4, ge=0)
    seed: int = 0
    eval_every: int = Field(0, ge=0)
    valid_sample: int = Field(1000, ge=1)
    checkpoint_every: int = Field(0, ge=0)

    # evaluation
    eval_mode: Literal["raw", "filtered", "both"] = "filtered"
    compute_map: bool = False
    category_threshold: float = Field(1.5, gt=0)

    # rules
    mine_rules: bool = False
    rule_lengths: List[int] = Field(default_factory=lambda: [2])
    rule_k: int = Field(100, ge=1)
    rule_delta: Optional[float] = Field(None, ge=0)
    rule_exclude: Optional[Path] = None
    drop_singleton_domains: bool = False
    precision_cap: int = Field(10000, ge=1)

    workers: Optional[int] = Field(None, ge=1)

    @field_validator("model")
    @classmethod
    def _check_model(cls, value: str) -> str:
        return ModelKind.parse(value).value

    @field_validator("projection")
    @classmethod
    def _check_projection(cls, value: str) -> str:
        return Projection.parse(value).value

    @field_validator("rule_lengths", mode="before")
    @classmethod
    def _split_lengths(cls, value):
        if isinstance(value, str):
            value = [v for v in value.replace(",", " ").split() if v]
        return value

    @field_validator("rule_lengths")
    @classmethod
    def _check_lengths(cls, value: List[int]) -> List[int]:
        if not value or any(v not in (2, 3) for v in value):
            raise ValueError("rule lengths must be 2 and/or 3")
        return sorted(set(value))

    @property
    def kind(self) -> ModelKind:
        return ModelKind.parse(self.model)

    def train_config(self, chunk_size: Optional[int] = None) -> TrainConfig:
        return TrainConfig(
            epochs=self.epochs,
            batches=self.batches,
            learning_rate=self.learning_rate,
            margin=self.margin,
            l2=self.l2,
            seed=self.seed,
            eval_every=self.eval_every,
            valid_sample=self.valid_sample,
            chunk_size=chunk_size or get_config().runtime.chunk_size,
        )

    def resolved_workers(self) -> int:
        return self.workers or get_config().runtime.workers

    def to_manifest(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")


def parse_run_file(text: str, source: str = "<config>") -> Dict[str, str]:
    """
    Split "key = value" lines into a dict of raw strings.

    A '#' opens a comment only at the start of a line or after
    whitespace, so values such as "data/run#1/train.txt" stay whole.

    Raises:
        ConfigError: Line without '=' or a repeated key
    """
    values: Dict[str, str] = {}
    for line_number, raw in enumerate(text.splitlines(), 1):
        line = COMMENT_PATTERN.sub("", raw).strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {line_number}", f"expected 'key = value' in {source}, got {raw.strip()!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key in values:
            raise ConfigError(key, f"set twice in {source}")
        values[key] = value
    return values


def build_run_config(values: Dict[str, Any], check_files: bool = True) -> RunConfig:
    """
    Merge a preset with explicit values and validate.

    Raises:
        ConfigError: Unknown preset or key, invalid value, missing input file
    """
    values = {k: v for k, v in values.items() if v != ""}
    preset = values.get("preset")
    merged: Dict[str, Any] = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError("preset", f"unknown preset '{preset}', expected one of {sorted(PRESETS)}")
        merged.update(PRESETS[preset])
    merged.update(values)

    try:
        config = RunConfig(**merged)
    except ValidationError as e:
        error = e.errors()[0]
        key = str(error["loc"][0]) if error.get("loc") else "config"
        message = "unknown key" if error["type"] == "extra_forbidden" else error["msg"]
        raise ConfigError(key, message) from None

    if check_files:
        for key in PATH_KEYS:
            path = getattr(config, key)
            if path is not None and not Path(path).is_file():
                raise ConfigError(key, f"file not found: {path}")
    return config


def load_run_config(path: str, overrides: Optional[Dict[str, Any]] = None, check_files: bool = True) -> RunConfig:
    """
    Read and validate a run file.

    Args:
        path: "key = value" file
        overrides: Values taking precedence over the file (e.g. from the CLI)
        check_files: Require every configured input path to exist

    Raises:
        ConfigError: Missing file, syntax error or invalid setting
    """
    config_path = Path(path)
    if not config_path.is_file():
        raise ConfigError("config", f"file not found: {config_path}")
    values = parse_run_file(config_path.read_text(encoding="utf-8"), str(config_path))
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    config = build_run_config(values, check_files)
    logger.debug(f"Loaded run configuration from {config_path}")
    return config
