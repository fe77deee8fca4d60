"""
Logging System Module - Run telemetry and manifests
"""

from .telemetry import TelemetryLogger, RunManifest, load_manifest, check_drift, MANIFEST_FILE

__all__ = [
    "TelemetryLogger",
    "RunManifest",
    "load_manifest",
    "check_drift",
    "MANIFEST_FILE",
]
