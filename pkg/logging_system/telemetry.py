"""
Telemetry Logger - Run manifest with events, errors, dataset digests and metrics.
Writes manifest.json next to the run outputs.
Improvements:
- Auto-save to manifest_temp.json every N events
- Atomic writes, so a manifest is never half-written
- Dataset digests for drift detection between commands
"""

import json
import logging
from dataclasses import asdict, dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional

from tools.file_tools import atomic_write_text, describe_file

logger = logging.getLogger(__name__)

MANIFEST_FILE = "manifest.json"
TEMP_MANIFEST_FILE = "manifest_temp.json"


@dataclass
class RunManifest:
    """
    Structure of manifest.json.
    """
    # Metadata
    run_id: str = ""
    command: str = ""
    started_at: str = ""
    completed_at: str = ""
    status: str = ""
    seed: Optional[int] = None
    wall_clock_seconds: float = 0.0

    # Inputs
    config: Dict[str, Any] = field(default_factory=dict)
    datasets: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    dataset_stats: Dict[str, Any] = field(default_factory=dict)

    # Results
    metrics: Dict[str, Any] = field(default_factory=dict)
    outputs: Dict[str, str] = field(default_factory=dict)

    events: List[Dict[str, Any]] = field(default_factory=list)
    errors: List[Dict[str, Any]] = field(default_factory=list)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunManifest":
        known = {k: v for k, v in data.items() if k in cls.__dataclass_fields__}
        return cls(**known)


class TelemetryLogger:
    """
    Collects run events and produces manifest.json.
    """

    def __init__(
        self,
        output_dir: str,
        command: str,
        run_id: Optional[str] = None,
        auto_save_interval: int = 10
    ):
        """
        Initialize the telemetry logger.

        Args:
            output_dir: Directory receiving manifest.json
            command: Subcommand being run
            run_id: Unique run identifier
            auto_save_interval: Events between temporary saves (0 disables)
        """
        self.output_dir = Path(output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)

        self.run_id = run_id or self._generate_run_id(command)
        self.data = RunManifest(
            run_id=self.run_id,
            command=command,
            started_at=datetime.now().isoformat(),
        )

        self._event_count = 0
        self._start_time = datetime.now()
        self._auto_save_interval = auto_save_interval

    def _generate_run_id(self, command: str) -> str:
        timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
        return f"{command}_{timestamp}"

    def log_event(self, event_type: str, details: Optional[Dict[str, Any]] = None) -> None:
        """
        Record an event.

        Args:
            event_type: e.g. "epoch_completed", "checkpoint_written"
            details: JSON-serializable details
        """
        self._event_count += 1
        self.data.events.append({
            "event_id": self._event_count,
            "timestamp": datetime.now().isoformat(),
            "event_type": event_type,
            "details": details or {}
        })
        logger.debug(f"[telemetry] {event_type}: {details}")

        if self._auto_save_interval and self._event_count % self._auto_save_interval == 0:
            self._quick_save()

    def _quick_save(self) -> None:
        try:
            atomic_write_text(self.output_dir / TEMP_MANIFEST_FILE, self._render())
        except OSError as e:
            logger.warning(f"Telemetry quick save failed: {e}")

    def log_error(self, error_type: str, message: str, details: Optional[Dict[str, Any]] = None) -> None:
        self.data.errors.append({
            "timestamp": datetime.now().isoformat(),
            "error_type": error_type,
            "message": message,
            "details": details or {}
        })

    def set_config(self, config: Dict[str, Any], seed: Optional[int] = None) -> None:
        self.data.config = config
        self.data.seed = seed

    def record_datasets(self, paths: Dict[str, Optional[str]]) -> None:
        """Store path, size and SHA-256 of every configured input file."""
        self.data.datasets = {
            name: describe_file(path) for name, path in paths.items() if path is not None
        }

    def set_dataset_stats(self, stats: Dict[str, Any]) -> None:
        self.data.dataset_stats = stats

    def set_metrics(self, section: str, metrics: Dict[str, Any]) -> None:
        self.data.metrics[section] = metrics

    def record_output(self, name: str, path: str) -> None:
        self.data.outputs[name] = str(path)

    def finalize(self, status: str) -> None:
        self.data.status = status
        self.data.completed_at = datetime.now().isoformat()

    def _render(self) -> str:
        self.data.wall_clock_seconds = (datetime.now() - self._start_time).total_seconds()
        return json.dumps(asdict(self.data), indent=2, ensure_ascii=False, default=str)

    def save(self, filename: str = MANIFEST_FILE) -> Path:
        """Write the manifest atomically and return its path."""
        path = atomic_write_text(self.output_dir / filename, self._render())
        temp = self.output_dir / TEMP_MANIFEST_FILE
        if filename == MANIFEST_FILE and temp.exists():
            temp.unlink()
        return path

    def get_summary(self) -> Dict[str, Any]:
        return {
            "run_id": self.run_id,
            "command": self.data.command,
            "status": self.data.status,
            "duration": (datetime.now() - self._start_time).total_seconds(),
            "events_logged": self._event_count,
            "errors_count": len(self.data.errors),
        }


def load_manifest(path: str) -> RunManifest:
    """Read a manifest.json (or a directory containing one)."""
    manifest_path = Path(path)
    if manifest_path.is_dir():
        manifest_path = manifest_path / MANIFEST_FILE
    with open(manifest_path, 'r', encoding='utf-8') as f:
        return RunManifest.from_dict(json.load(f))


def check_drift(manifest: RunManifest, paths: Dict[str, Optional[str]]) -> List[str]:
    """
    Names of datasets whose current digest differs from the manifest.

    Datasets absent from either side are ignored.
    """
    drifted = []
    for name, path in paths.items():
        recorded = manifest.datasets.get(name)
        if path is None or not recorded or not recorded.get("sha256"):
            continue
        current = describe_file(path)
        if current["sha256"] != recorded["sha256"]:
            drifted.append(name)
    return drifted
