"""
`sweep` command: the same stream replayed for several epsilon values.

Runs fan out to a process pool (one run per worker, nothing shared); this
process is the single collector that writes every file.
"""

import logging
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor

from pydantic import ValidationError

from app.commands import EXIT_BREACH, EXIT_ERROR, EXIT_OK
from app.commands.run import RunOutcome, execute_run
from app.errors import OcoError
from app.models.run_config import RunConfig
from app.services.export import render_sweep_csv, write_artifacts
from app.settings import settings
from app.templates_config import g17_filter

logger = logging.getLogger(__name__)

SWEEP_FILE = "sweep.csv"


def run_directory_name(epsilon: float) -> str:
    return f"eps_{g17_filter(epsilon)}"


def sweep_configs(config: RunConfig, epsilons: Sequence[float]) -> list[RunConfig]:
    """One validated config per epsilon; everything else is shared."""
    base = config.model_dump()
    return [RunConfig.model_validate({**base, "epsilon": epsilon}) for epsilon in epsilons]


def execute_sweep(configs: Sequence[RunConfig], workers: int | None = None) -> list[RunOutcome]:
    """Outcomes in the order of `configs`, however many workers ran them."""
    workers = min(workers or settings.worker_count, len(configs))
    if workers <= 1:
        return [execute_run(config) for config in configs]
    logger.info("Sweeping %d runs on %d workers", len(configs), workers)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(execute_run, configs))


def cmd_sweep(config: RunConfig, epsilons: Sequence[float]) -> int:
    """Run every epsilon, write per-run artifacts under eps_<value>/ and the sweep matrix."""
    if not epsilons:
        logger.error("sweep needs at least one epsilon")
        return EXIT_ERROR
    try:
        configs = sweep_configs(config, epsilons)
        outcomes = execute_sweep(configs)
        for outcome in outcomes:
            write_artifacts(config.output_dir / run_directory_name(outcome.config.epsilon), outcome.files)
        write_artifacts(config.output_dir, {SWEEP_FILE: render_sweep_csv([o.sweep_row for o in outcomes])})
    except ValidationError as e:
        logger.error("invalid sweep configuration: %s", e)
        return EXIT_ERROR
    except (OcoError, OSError):
        logger.error("sweep failed", exc_info=True)
        return EXIT_ERROR

    for outcome in outcomes:
        row = outcome.sweep_row
        logger.info(
            "eps=%g regret=%.6g violation=%.6g max dual=%.6g slopes (V, R)=(%s, %s) monitors=%s",
            row.epsilon, row.final_regret, row.final_violation, row.max_dual_norm,
            row.violation_slope, row.regret_slope, row.monitors,
        )
    return EXIT_BREACH if any(o.exit_code == EXIT_BREACH for o in outcomes) else EXIT_OK
