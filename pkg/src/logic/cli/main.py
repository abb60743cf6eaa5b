"""Command-line entry point: run, validate and list-models."""
import argparse
import sys
from typing import List, Optional

from .. import __version__
from ..analytics.scenario_pipeline import ScenarioPipeline
from ..data_models.model_spec import MODEL_VARIANTS
from ..ingestion.config_loader import ConfigLoader
from ..ingestion.presets import load_preset
from ..utils.constants import PRESET_NAMES
from ..utils.errors import ConfigInvalid
from ..utils.logging import setup_logging

logger = setup_logging(__name__)


def list_models() -> List[str]:
    """One line per model variant, sorted, naming required and optional parameters."""
    lines = []
    for name in sorted(MODEL_VARIANTS):
        fields = {k: v for k, v in MODEL_VARIANTS[name].model_fields.items() if k != "variant"}
        required = [k for k, v in fields.items() if v.is_required()]
        optional = [k for k, v in fields.items() if not v.is_required()]
        line = f"{name}: required=[{', '.join(required)}]"
        if optional:
            line += f" optional=[{', '.join(optional)}]"
        lines.append(line)
    return lines


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="floquet-lab",
        description="Numerical Floquet and quantum-dynamics scenarios.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Run a scenario and write its artifacts")
    source = run.add_mutually_exclusive_group(required=True)
    source.add_argument("config", nargs="?", help="Scenario JSON file")
    source.add_argument("--preset", choices=PRESET_NAMES, help="Built-in scenario")
    run.add_argument("--out", help="Output directory (overrides the config)")

    validate = commands.add_parser("validate", help="Validate a scenario without running it")
    validate.add_argument("config", help="Scenario JSON file")

    commands.add_parser("list-models", help="List model variants and their parameters")
    return parser


def _run(args: argparse.Namespace) -> int:
    loader = ConfigLoader()
    try:
        config = load_preset(args.preset) if args.preset else loader.load(args.config)
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except ConfigInvalid as e:
        for path, message in e.problems:
            print(f"{path}: {message}", file=sys.stderr)
        return 2

    report = ScenarioPipeline().execute(config, output_dir=args.out)
    for entry in report.entries:
        status = entry.verdict or entry.status
        print(f"[{entry.index}] {entry.kind}: {status}")
    for error in report.errors:
        print(f"error: {error}", file=sys.stderr)
    return 0 if report.success else 1


def _validate(args: argparse.Namespace) -> int:
    try:
        problems = ConfigLoader().validate(args.config)
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    if not problems:
        print("ok")
        return 0
    for path, message in problems:
        print(f"{path}: {message}")
    return 1


def main(argv: Optional[List[str]] = None) -> int:
    """
    Parse arguments and dispatch.

    Returns:
        Process exit code: 0 on success, 1 when a diagnostic or validation failed,
        2 for unreadable input
    """
    args = build_parser().parse_args(argv)
    logger.debug(f"Command: {args.command}")
    if args.command == "run":
        return _run(args)
    if args.command == "validate":
        return _validate(args)
    print("\n".join(list_models()))
    return 0


if __name__ == "__main__":
    sys.exit(main())
