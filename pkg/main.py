#!/usr/bin/env python3
"""
kbembed - Main Entry Point
Knowledge-base embeddings: training, link-prediction evaluation and rule mining.

Usage:
    python main.py prepare --config runs/fb15k.conf
    python main.py train --config runs/fb15k.conf
    python main.py eval --config runs/fb15k.conf --checkpoint runs/default/model.ckpt --mode both
    python main.py rules --config runs/fb15k.conf --checkpoint runs/default/model.ckpt --length 2,3
    python main.py export --checkpoint runs/default/model.ckpt --output-dir vectors --relations
    python main.py run --config runs/fb15k.conf
"""

import argparse
import logging
import os
import signal
import sys
from pathlib import Path
from typing import Any, Dict, Optional

# Fix Windows console encoding for Rich Unicode characters
if sys.platform == "win32":
    os.environ.setdefault("PYTHONIOENCODING", "utf-8")
    try:
        sys.stdout.reconfigure(encoding='utf-8')
        sys.stderr.reconfigure(encoding='utf-8')
    except Exception:
        pass

from dotenv import load_dotenv
from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from rich.progress import BarColumn, Progress, SpinnerColumn, TextColumn, TimeElapsedColumn

from config import ConfigError, RunConfig, get_config, load_run_config
from logging_system.telemetry import TelemetryLogger
from models import CapabilityError
from orchestrator.commands import cmd_eval, cmd_export, cmd_prepare, cmd_rules, cmd_run, cmd_train
from tools.checkpoint import VocabularyMismatchError

# Load environment variables
load_dotenv()

console = Console()

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_CANCELLED = 130

# Errors caused by the invocation rather than the computation
USAGE_ERRORS = (ConfigError, FileNotFoundError, VocabularyMismatchError, CapabilityError)

# Global telemetry for signal handler
_telemetry: Optional[TelemetryLogger] = None


def setup_logging(verbose: bool = False, log_dir: Optional[Path] = None):
    """Configure console (rich) and file logging."""
    telemetry_config = get_config().telemetry
    level = logging.DEBUG if verbose or telemetry_config.verbose else getattr(
        logging, telemetry_config.log_level, logging.INFO
    )
    log_dir = Path(log_dir or telemetry_config.log_dir)
    log_dir.mkdir(parents=True, exist_ok=True)

    file_handler = logging.FileHandler(log_dir / "kbembed.log", mode='a', encoding='utf-8')
    file_handler.setFormatter(logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s'))
    logging.basicConfig(
        level=level,
        format='%(message)s',
        handlers=[
            RichHandler(console=console, show_path=False, rich_tracebacks=verbose),
            file_handler,
        ],
        force=True,
    )


def signal_handler(sig, frame):
    """Handle termination signals gracefully."""
    console.print("\n[yellow][!] Received termination signal, cleaning up...[/yellow]")
    if _telemetry:
        _telemetry.log_event("run_cancelled", {"reason": "signal_received"})
        _telemetry.finalize("cancelled")
        _telemetry.save()
    sys.exit(EXIT_CANCELLED)


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subcommand per pipeline entry point."""
    parser = argparse.ArgumentParser(
        prog="kbembed",
        description="Knowledge-base embeddings: train, evaluate, mine rules",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
    python main.py train --config runs/wn.conf
    python main.py eval --config runs/wn.conf --checkpoint runs/wn/model.ckpt --mode both --map
    python main.py rules --config runs/fb.conf --checkpoint runs/fb/model.ckpt --K 100 --delta 36.3
        """
    )
    parser.add_argument("--verbose", action="store_true", help="Enable verbose logging output")

    commands = parser.add_subparsers(dest="command", required=True)

    def with_config(sub: argparse.ArgumentParser) -> argparse.ArgumentParser:
        sub.add_argument("--config", required=True, help="Run file with 'key = value' lines")
        sub.add_argument("--output-dir", default=None, help="Overrides output_dir from the run file")
        sub.add_argument("--seed", type=int, default=None, help="Overrides seed from the run file")
        sub.add_argument("--workers", type=int, default=None, help="Worker threads for evaluation and mining")
        return sub

    with_config(commands.add_parser("prepare", help="Filter / augment a dataset and write prepared splits"))

    train = with_config(commands.add_parser("train", help="Train a model"))
    train.add_argument("--resume", default=None, help="Checkpoint to continue training from")

    evaluate = with_config(commands.add_parser("eval", help="Evaluate a checkpoint on the test split"))
    evaluate.add_argument("--checkpoint", required=True)
    evaluate.add_argument("--mode", choices=["raw", "filtered", "both"], default=None)
    evaluate.add_argument("--map", action="store_true", help="Also compute type-checked MAP")

    rules = with_config(commands.add_parser("rules", help="Mine Horn rules from relation embeddings"))
    rules.add_argument("--checkpoint", required=True)
    rules.add_argument("--length", default=None, help="Rule lengths, e.g. 2 or 2,3")
    rules.add_argument("--K", dest="k", type=int, default=None, help="Nearest sequences kept per head (default 100)")
    rules.add_argument("--delta", type=float, default=None, help="Distance threshold (default: preset per model)")
    rules.add_argument("--exclude", default=None, help="File of relation names to leave out of rule bodies")

    export = commands.add_parser("export", help="Export entity / relation vectors")
    export.add_argument("--checkpoint", required=True)
    export.add_argument("--output-dir", required=True)
    export.add_argument("--entities", action="store_true")
    export.add_argument("--relations", action="store_true")
    export.add_argument("--vocab-dir", default=None, help="Vocabulary directory (default: vocab/ of the run)")

    with_config(commands.add_parser("run", help="Train, evaluate and optionally mine rules"))

    return parser


def config_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    """CLI flags that override run-file keys (None means not given)."""
    overrides = {
        "output_dir": args.output_dir,
        "seed": args.seed,
        "workers": args.workers,
    }
    if args.command == "eval":
        overrides["eval_mode"] = args.mode
        overrides["compute_map"] = True if args.map else None
    if args.command == "rules":
        overrides.update({
            "rule_lengths": args.length,
            "rule_k": args.k,
            "rule_delta": args.delta,
            "rule_exclude": args.exclude,
        })
    return overrides


def display_banner():
    console.print(Panel("[*] kbembed\nKnowledge-base embeddings and rule mining", style="bold blue"))


def display_config(config: RunConfig):
    console.print("\n[bold]Configuration:[/bold]")
    console.print(f"   Model: {config.model} (d={config.dim}, projection={config.projection})")
    console.print(f"   Train: {config.train}")
    console.print(f"   Epochs: {config.epochs}  Batches: {config.batches}  lr: {config.learning_rate}  L2: {config.l2}")
    console.print(f"   Seed: {config.seed}")
    console.print(f"   Output: {config.output_dir}")
    console.print()


def display_results(state: Dict[str, Any]):
    """Print a short summary of whatever stages ran."""
    history = state.get("history")
    if history is not None and len(history):
        console.print(f"   Final mean loss: {history.epochs[-1].mean_loss:.6f}")
    for mode, report in (state.get("reports") or {}).items():
        console.print(
            f"   {mode}: MRR {report.mrr:.4f}  HITS@10 {report.hits10:.1f}  "
            f"mean rank {report.mean_rank:.1f}  ({report.n_queries} queries)"
        )
        if report.map is not None and report.map_queries == 0:
            console.print(f"   {mode}: MAP n/a (all {report.map_skipped} queries outside the relation domains)")
        elif report.map is not None:
            console.print(f"   {mode}: MAP {report.map:.4f}")
    if state.get("rules") is not None:
        console.print(f"   Rules kept: {len(state['rules'])}")
    for name, path in (state.get("outputs") or {}).items():
        console.print(f"   [>] {name}: {path}")


def run_command(args: argparse.Namespace, telemetry: TelemetryLogger, config: Optional[RunConfig]) -> Dict[str, Any]:
    """Dispatch to the orchestrator command, with a progress bar over epochs."""
    if args.command == "prepare":
        return {"outputs": cmd_prepare(config, telemetry)}
    if args.command == "export":
        entities, relations = args.entities, args.relations
        if not entities and not relations:
            entities = relations = True
        return {"outputs": cmd_export(args.checkpoint, args.output_dir, entities, relations, args.vocab_dir, telemetry)}
    if args.command == "eval":
        return cmd_eval(config, args.checkpoint, telemetry)
    if args.command == "rules":
        return cmd_rules(config, args.checkpoint, telemetry)

    with Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        BarColumn(),
        TextColumn("{task.completed}/{task.total}"),
        TimeElapsedColumn(),
        console=console
    ) as progress:
        task = progress.add_task("Training...", total=config.epochs)

        def on_epoch(epoch, record):
            progress.update(task, completed=epoch, description=f"Epoch {epoch} loss {record.mean_loss:.4f}")

        if args.command == "train":
            state = cmd_train(config, telemetry, on_epoch=on_epoch, resume=args.resume)
        else:
            state = cmd_run(config, telemetry, on_epoch=on_epoch)
        progress.update(task, description="Complete!")
    return state


def main(argv=None) -> int:
    """Main entry point."""
    global _telemetry

    args = build_parser().parse_args(argv)

    setup_logging(args.verbose)
    logger = logging.getLogger(__name__)

    signal.signal(signal.SIGINT, signal_handler)
    signal.signal(signal.SIGTERM, signal_handler)

    display_banner()

    config = None
    try:
        if args.command != "export":
            config = load_run_config(args.config, config_overrides(args))
            display_config(config)
    except USAGE_ERRORS as e:
        console.print(f"[red][X] Error: {e}[/red]")
        return EXIT_USAGE

    output_dir = args.output_dir if args.command == "export" else str(config.output_dir)
    telemetry = TelemetryLogger(
        output_dir=output_dir,
        command=args.command,
        auto_save_interval=get_config().telemetry.auto_save_interval
    )
    _telemetry = telemetry

    try:
        console.print(f"[bold][>>] Running {args.command}...[/bold]\n")
        state = run_command(args, telemetry, config)

        telemetry.finalize("success")
        telemetry.log_event("run_completed", {"command": args.command})
        manifest = telemetry.save()

        console.print("\n" + "=" * 60)
        console.print(f"[bold][*] {args.command} complete[/bold]")
        console.print("=" * 60)
        display_results(state)
        console.print(f"\n   [>] Manifest saved to: {manifest}")
        return EXIT_OK

    except KeyboardInterrupt:
        console.print("\n[yellow][!] Operation cancelled by user[/yellow]")
        telemetry.log_event("run_cancelled", {"reason": "user_interrupt"})
        telemetry.finalize("cancelled")
        telemetry.save()
        return EXIT_CANCELLED

    except USAGE_ERRORS as e:
        console.print(f"\n[red][X] Error: {e}[/red]")
        telemetry.log_error(type(e).__name__, str(e))
        telemetry.finalize("failed")
        telemetry.save()
        return EXIT_USAGE

    except Exception as e:
        console.print(f"\n[red][X] Error: {e}[/red]")
        logger.debug("Run failed", exc_info=True)
        telemetry.log_error(type(e).__name__, str(e))
        telemetry.finalize("failed")
        telemetry.save()
        if args.verbose:
            import traceback
            console.print(traceback.format_exc())
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
