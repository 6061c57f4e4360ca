"""
Command-line entry point: `oco-sim run | sweep | verify`.
"""

import argparse
import json
import logging
import sys
from collections.abc import Sequence

from pydantic import ValidationError

from app.commands import EXIT_ERROR
from app.commands.run import cmd_run
from app.commands.sweep import cmd_sweep
from app.commands.verify import cmd_verify
from app.models.run_config import SCENARIO_NAMES, RunConfig
from app.settings import settings

logger = logging.getLogger(__name__)

TEXT_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
ALGORITHMS = ("adaptive", "ogd", "fixed_rate", "static_averaged")
# argparse dest -> RunConfig field
CONFIG_FLAGS = {
    "scenario": "scenario",
    "n": "n",
    "seed": "seed",
    "algo": "algorithm",
    "epsilon": "epsilon",
    "alpha": "alpha",
    "T": "T",
    "checkpoint_every": "checkpoint_every",
    "out": "output_dir",
}


class JsonFormatter(logging.Formatter):
    """One JSON object per line."""

    def format(self, record: logging.LogRecord) -> str:
        entry = {
            "time": self.formatTime(record),
            "logger": record.name,
            "level": record.levelname,
            "message": record.getMessage(),
        }
        if record.exc_info:
            entry["exc_info"] = self.formatException(record.exc_info)
        return json.dumps(entry)


def configure_logging(verbose: bool = False) -> None:
    level = logging.DEBUG if verbose else getattr(logging, settings.log_level.upper(), logging.INFO)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(JsonFormatter() if settings.log_format == "json" else logging.Formatter(TEXT_FORMAT))
    logging.basicConfig(level=level, handlers=[handler], force=True)


def _epsilon_list(text: str) -> list[float]:
    if not text.strip():
        return []
    try:
        return [float(part) for part in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON run configuration; flags override its fields")
    parser.add_argument("--scenario", choices=SCENARIO_NAMES)
    parser.add_argument("--n", type=int, help="problem dimension")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--algo", choices=ALGORITHMS)
    parser.add_argument("--epsilon", type=float)
    parser.add_argument("--alpha", type=float, help="rate scale of the static averaged mode")
    parser.add_argument("--T", type=int, dest="T", help="horizon")
    parser.add_argument("--checkpoint-every", type=int, dest="checkpoint_every")
    parser.add_argument("--out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="oco-sim", description=settings.app_name)
    parser.add_argument("--version", action="version", version=f"%(prog)s {settings.app_version}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log at DEBUG level")
    commands = parser.add_subparsers(dest="command", required=True)

    run_parser = commands.add_parser("run", help="run one configuration")
    _add_config_flags(run_parser)

    sweep_parser = commands.add_parser("sweep", help="run one configuration for several epsilon values")
    _add_config_flags(sweep_parser)
    sweep_parser.add_argument(
        "--epsilons", type=_epsilon_list, default=[0.0, 0.25, 0.5, 0.75], help="comma-separated list"
    )

    verify_parser = commands.add_parser("verify", help="run the numerical self-checks")
    verify_parser.add_argument("--seed", type=int, help="instance sampler seed")
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    overrides = {field: getattr(args, dest) for dest, field in CONFIG_FLAGS.items()}
    return RunConfig.load(args.config, overrides)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on usage errors; 2 is reserved for monitor breaches.
        return EXIT_ERROR if e.code else 0
    configure_logging(args.verbose)

    if args.command == "verify":
        return cmd_verify(args.seed)

    try:
        config = load_config(args)
    except ValidationError as e:
        logger.error("invalid configuration: %s", e)
        return EXIT_ERROR
    except (OSError, json.JSONDecodeError) as e:
        logger.error("cannot read configuration %s: %s", args.config, e)
        return EXIT_ERROR

    if args.command == "run":
        return cmd_run(config)
    return cmd_sweep(config, args.epsilons)


if __name__ == "__main__":
    sys.exit(main())
