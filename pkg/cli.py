"""Command-line entry point: ``python cli.py <map|evolve|circuit|verify> --config scenario.json``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from artifacts import ArtifactWriter
from config import config
from errors import ConfigError, FrequencyAssignmentError, GaugeBridgeError, SingularRealPartError
from logging_config import set_global_level, setup_logger
from pipeline import ScenarioProcessor
from scenario_mapper import Scenario, load_scenario

logger = setup_logger(__name__)

EXIT_PASS = 0
EXIT_TOLERANCE = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

COMMANDS = ("map", "evolve", "circuit", "verify")

_processor: ScenarioProcessor | None = None


def _get_processor() -> ScenarioProcessor:
    global _processor
    if _processor is None:
        logger.debug("Initialising scenario processor")
        _processor = ScenarioProcessor()
    return _processor


def _u64(value: str) -> int:
    try:
        seed = int(value, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {value!r}") from None
    if not 0 <= seed < 2**64:
        raise argparse.ArgumentTypeError(f"seed must fit in an unsigned 64-bit integer, got {seed}")
    return seed


def _steps(value: str) -> int:
    try:
        steps = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"steps must be an integer, got {value!r}") from None
    if steps < 2:
        raise argparse.ArgumentTypeError(f"steps must be >= 2, got {steps}")
    return steps


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gauge-bridge",
        description="Gauge transformations between quantum systems and their electric-network realization.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    helps = {
        "map": "build the transitive gauge and write omega.csv, hprime.csv",
        "evolve": "integrate the source Hamiltonian and write psi.csv",
        "circuit": "synthesize and simulate the network realization of a constant Hermitian source",
        "verify": "run the invariant suite on a source/target pair",
    }
    for command in COMMANDS:
        sub = subparsers.add_parser(command, help=helps[command])
        sub.add_argument("--config", required=True, type=Path, help="scenario JSON document")
        sub.add_argument("--out", type=Path, default=None, help="output directory")
        sub.add_argument("--seed", type=_u64, default=None, help="64-bit seed for randomized checks")
        sub.add_argument("--steps", type=_steps, default=None, help="override the scenario grid step count")
        sub.add_argument(
            "--log-level",
            choices=["DEBUG", "INFO", "WARNING", "ERROR"],
            default=None,
            help="override GAUGE_BRIDGE_LOG_LEVEL for this run",
        )
    return parser


def resolve_seed(cli_seed: Optional[int], scenario: Scenario) -> int:
    """--seed, then the scenario's seed, then the configured default."""
    if cli_seed is not None:
        return cli_seed
    if scenario.seed is not None:
        return scenario.seed
    return config.DEFAULT_SEED


def resolve_output_dir(cli_out: Optional[Path], scenario: Scenario, config_path: Path) -> Path:
    """--out, then the scenario's output_dir (relative to the scenario file), then <default root>/<name>."""
    if cli_out is not None:
        return cli_out
    if scenario.output_dir:
        out = Path(scenario.output_dir)
        return out if out.is_absolute() else config_path.parent / out
    return Path(config.DEFAULT_OUTPUT_DIR) / scenario.name


def _numeric_failure_message(exc: Exception) -> str:
    if isinstance(exc, SingularRealPartError):
        return f"{exc} (ports {list(exc.ports)})"
    if isinstance(exc, FrequencyAssignmentError):
        return f"{exc} (port {exc.port})"
    return str(exc)


def _config_failure(exc: Exception) -> int:
    logger.error("Configuration error: %s", exc)
    print(f"error: {exc}", file=sys.stderr)
    return EXIT_CONFIG


def main(argv: Optional[List[str]] = None) -> int:
    """Run one command; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help
        return int(exc.code or 0)

    if args.log_level:
        set_global_level(logging.getLevelName(args.log_level))

    try:
        config.validate()
        scenario = load_scenario(args.config, steps_override=args.steps)
    except (ConfigError, ValueError) as exc:
        return _config_failure(exc)

    seed = resolve_seed(args.seed, scenario)
    try:
        result = _get_processor().run(args.command, scenario, seed)
    except ConfigError as exc:
        return _config_failure(exc)
    except Exception as exc:
        message = _numeric_failure_message(exc)
        logger.error("Numeric failure: %s", message, exc_info=not isinstance(exc, GaugeBridgeError))
        print(f"numeric failure: {message}", file=sys.stderr)
        return EXIT_NUMERIC

    out_dir = resolve_output_dir(args.out, scenario, args.config)
    writer = ArtifactWriter(out_dir)
    writer.stage_all(result.files)
    try:
        writer.commit()
    except OSError as exc:
        print(f"error: cannot write artifacts to {out_dir}: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    sys.stdout.write(result.report.to_text())
    if not result.passed:
        failed = ", ".join(check.name for check in result.report.failures)
        logger.warning("Tolerance failure in %s: %s", args.command, failed)
        return EXIT_TOLERANCE
    return EXIT_PASS


if __name__ == "__main__":
    sys.exit(main())
