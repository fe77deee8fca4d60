#!/usr/bin/env python3
"""
Run Report Generator
Generates human-readable reports from a run's manifest.json.
"""

import argparse
import json
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Optional

from logging_system.telemetry import MANIFEST_FILE, RunManifest, load_manifest
from tools.file_tools import atomic_write_text


class ManifestReportGenerator:
    """Generate reports from a run manifest."""

    def __init__(self, manifest_path: str):
        """
        Initialize the report generator.

        Args:
            manifest_path: manifest.json or the run directory containing it
        """
        self.manifest_path = Path(manifest_path)
        if self.manifest_path.is_dir():
            self.manifest_path = self.manifest_path / MANIFEST_FILE
        if not self.manifest_path.exists():
            raise FileNotFoundError(f"Manifest not found: {self.manifest_path}")
        self.manifest: RunManifest = load_manifest(str(self.manifest_path))

    def generate_summary_report(self) -> str:
        """Run metadata, dataset statistics and errors."""
        m = self.manifest
        lines = []
        lines.append("=" * 70)
        lines.append("RUN SUMMARY REPORT")
        lines.append("=" * 70)
        lines.append("")

        lines.append("METADATA")
        lines.append("-" * 40)
        lines.append(f"  Run ID:     {m.run_id or 'N/A'}")
        lines.append(f"  Command:    {m.command or 'N/A'}")
        lines.append(f"  Status:     {(m.status or 'N/A').upper()}")
        lines.append(f"  Started:    {m.started_at or 'N/A'}")
        lines.append(f"  Completed:  {m.completed_at or 'N/A'}")
        lines.append(f"  Duration:   {m.wall_clock_seconds:.2f} seconds")
        lines.append(f"  Seed:       {m.seed if m.seed is not None else 'N/A'}")
        lines.append("")

        if m.config:
            lines.append("CONFIGURATION")
            lines.append("-" * 40)
            for key in ("preset", "model", "dim", "projection", "epochs", "batches", "learning_rate", "l2"):
                if key in m.config:
                    lines.append(f"  {key:<14} {m.config[key]}")
            lines.append("")

        if m.datasets:
            lines.append("DATASETS")
            lines.append("-" * 40)
            for name, info in m.datasets.items():
                lines.append(f"  {name:<6} {info.get('path', '')}  sha256 {str(info.get('sha256', ''))[:12]}")
            for key, value in m.dataset_stats.items():
                lines.append(f"  {key:<14} {value}")
            lines.append("")

        if m.errors:
            lines.append("ERRORS")
            lines.append("-" * 40)
            for i, error in enumerate(m.errors[:5], 1):
                lines.append(f"  {i}. [{error.get('error_type', 'Unknown')}] {error.get('message', 'No message')[:60]}")
            if len(m.errors) > 5:
                lines.append(f"  ... and {len(m.errors) - 5} more errors")
            lines.append("")

        lines.append("=" * 70)
        return "\n".join(lines)

    def generate_metrics_report(self) -> str:
        """One block per metric section (train, eval_raw, eval_filtered, rules)."""
        lines = []
        lines.append("=" * 70)
        lines.append("METRICS")
        lines.append("=" * 70)
        lines.append("")

        if not self.manifest.metrics:
            lines.append("  No metrics recorded.")
            return "\n".join(lines)

        for section, metrics in self.manifest.metrics.items():
            lines.append(section)
            lines.append("-" * 40)
            for key, value in metrics.items():
                lines.append(f"  {key:<22} {_format_value(value)}")
            lines.append("")

        if self.manifest.outputs:
            lines.append("OUTPUTS")
            lines.append("-" * 40)
            for name, path in self.manifest.outputs.items():
                lines.append(f"  {name:<22} {path}")
            lines.append("")

        lines.append("=" * 70)
        return "\n".join(lines)

    def generate_activity_report(self, last: int = 10) -> str:
        """Event counts and the most recent events."""
        lines = []
        lines.append("=" * 70)
        lines.append("EVENT TIMELINE")
        lines.append("=" * 70)
        lines.append("")

        events = self.manifest.events
        if not events:
            lines.append("  No events recorded.")
            return "\n".join(lines)

        counts: Dict[str, int] = {}
        for event in events:
            counts[event.get("event_type", "unknown")] = counts.get(event.get("event_type", "unknown"), 0) + 1
        lines.append("Event counts:")
        for event_type, count in sorted(counts.items()):
            lines.append(f"  {event_type:<22} {count}")
        lines.append("")

        lines.append(f"Last {min(last, len(events))} events:")
        lines.append("-" * 50)
        for event in events[-last:]:
            lines.append(f"  {event.get('timestamp', '')[:19]} {event.get('event_type', 'unknown')}")

        lines.append("")
        lines.append("=" * 70)
        return "\n".join(lines)

    def generate_full_report(self) -> str:
        sections = [
            self.generate_summary_report(),
            "",
            self.generate_metrics_report(),
            "",
            self.generate_activity_report()
        ]
        return "\n".join(sections)

    def save_report(self, output_path: Optional[str] = None, format: str = "txt") -> Path:
        """
        Save report to file.

        Args:
            output_path: Output file path
            format: Output format (txt, md)

        Returns:
            Path to saved report
        """
        if output_path is None:
            timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
            output_path = self.manifest_path.parent / f"report_{timestamp}.{format}"

        content = self.generate_full_report()
        if format == "md":
            content = _to_markdown(content)
        return atomic_write_text(output_path, content)


def _format_value(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _to_markdown(text: str) -> str:
    """Headings for section titles, rules for separators."""
    lines = text.split("\n")
    md_lines = []
    for i, line in enumerate(lines):
        following = lines[i + 1] if i + 1 < len(lines) else ""
        if line.startswith("="):
            md_lines.append("---")
        elif line.startswith("-" * 10):
            md_lines.append("")
        elif following.startswith("-" * 10) and line.strip():
            md_lines.append(f"### {line}")
        else:
            md_lines.append(line)
    return "\n".join(md_lines)


def main():
    """Main entry point."""
    parser = argparse.ArgumentParser(
        description="Generate reports from a run manifest"
    )
    parser.add_argument(
        "manifest",
        nargs="?",
        default="runs/default",
        help="manifest.json or run directory"
    )
    parser.add_argument("--output", "-o", help="Output file path")
    parser.add_argument("--format", "-f", choices=["txt", "md"], default="txt", help="Output format")
    parser.add_argument("--save", "-s", action="store_true", help="Save report to file")
    parser.add_argument("--summary", action="store_true", help="Show only summary")
    parser.add_argument("--metrics", action="store_true", help="Show only metrics")
    parser.add_argument("--activity", action="store_true", help="Show only event timeline")

    args = parser.parse_args()

    try:
        generator = ManifestReportGenerator(args.manifest)

        if args.summary:
            report = generator.generate_summary_report()
        elif args.metrics:
            report = generator.generate_metrics_report()
        elif args.activity:
            report = generator.generate_activity_report()
        else:
            report = generator.generate_full_report()

        if args.save or args.output:
            output_path = generator.save_report(args.output, args.format)
            print(f"Report saved to: {output_path}")
        else:
            print(report)

    except FileNotFoundError as e:
        print(f"Error: {e}")
        return 1
    except json.JSONDecodeError as e:
        print(f"Invalid JSON: {e}")
        return 1

    return 0


if __name__ == "__main__":
    exit(main())
