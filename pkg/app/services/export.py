"""
Artifact writers: trace.csv, summary.json, gnuplot data and script, and the
sweep matrix.

Renderers return text so a sweep's worker processes can build artifacts while
a single collector writes them. All numbers are printed with 17 significant
digits and every file is UTF-8 with LF line endings.
"""

import logging
from collections.abc import Sequence
from pathlib import Path

from pydantic import BaseModel, Field

from app.models.trace import RunTrace
from app.services.metrics import MonitorReport, TheoremConstants
from app.services.oracle import HindsightCosts
from app.templates_config import g17_filter, templates

logger = logging.getLogger(__name__)

TRACE_HEADER = ("t", "rho", "f_value", "cum_cost", "viol_norm", "dual_norm", "checkpoint_regret")
PLOT_COLUMNS = (
    "t",
    "regret",
    "violation",
    "cost_min",
    "cost_T",
    "cost_max",
    "cum_cost",
    "regret_bound",
    "violation_bound",
)
SWEEP_HEADER = (
    "epsilon",
    "final_regret",
    "final_violation",
    "max_dual_norm",
    "regret_bound",
    "violation_bound",
    "E",
    "violation_slope",
    "regret_slope",
    "monitors",
)


class ConstantsSummary(BaseModel):
    D: float
    F_star: float
    G_star: float
    G: float
    eta: float
    chi: float
    E: float


class HindsightSummary(BaseModel):
    """Best fixed-decision costs over the three hindsight sets."""

    X_min: float
    X_T: float
    X_max: float
    ordered: bool
    baseline_X_T: float | None = None


class BaselineSummary(BaseModel):
    algorithm: str = "fixed_rate"
    rho: float
    final_regret: float
    final_violation: float
    max_dual_norm: float
    hindsight_X_T: float


class RunSummary(BaseModel):
    scenario: str
    n: int
    seed: int
    algorithm: str
    epsilon: float
    alpha: float
    T: int
    final_regret: float
    final_violation: float
    max_dual_norm: float
    regret_bound: float
    violation_bound: float
    constants: ConstantsSummary
    b_T: list[float]
    hindsight: HindsightSummary
    monitors: list[dict] = Field(default_factory=list)
    baseline: BaselineSummary | None = None
    f_star: float | None = None
    assumption_breaches: list[str] = Field(default_factory=list)
    status: str = "pass"


class SweepRow(BaseModel):
    epsilon: float
    final_regret: float
    final_violation: float
    max_dual_norm: float
    regret_bound: float
    violation_bound: float
    E: float
    violation_slope: float | None = None
    regret_slope: float | None = None
    monitors: str = "pass"

    def cells(self) -> list[str]:
        values = self.model_dump()
        return [values[key] if key == "monitors" else g17_filter(values[key]) for key in SWEEP_HEADER]


def constants_summary(tc: TheoremConstants) -> ConstantsSummary:
    c = tc.consts
    return ConstantsSummary(D=c.D, F_star=c.F_star, G_star=c.G_star, G=c.G, eta=c.eta, chi=tc.chi, E=tc.E)


def _lines(rows: Sequence[Sequence[str]]) -> str:
    return "".join(",".join(row) + "\n" for row in rows)


def render_trace_csv(trace: RunTrace, curves: Sequence[HindsightCosts]) -> str:
    """One row per round; checkpoint_regret is filled only on checkpoint rounds."""
    regret_at = {point.t: float(trace.cum_cost[point.t - 1]) - point.cost_T for point in curves}
    rows = [TRACE_HEADER]
    for i in range(trace.T):
        t = i + 1
        rows.append(
            (
                str(t),
                g17_filter(float(trace.rhos[i])),
                g17_filter(float(trace.f_values[i])),
                g17_filter(float(trace.cum_cost[i])),
                g17_filter(float(trace.violation_series[i])),
                g17_filter(float(trace.dual_norms[i])),
                g17_filter(regret_at.get(t)),
            )
        )
    return _lines(rows)


def render_plot_data(
    trace: RunTrace,
    curves: Sequence[HindsightCosts],
    regret_bounds: Sequence[float] | None = None,
    violation_bounds: Sequence[float] | None = None,
) -> str:
    """Whitespace-separated checkpoint table for gnuplot; missing bounds print as NaN."""
    lines = ["# " + " ".join(PLOT_COLUMNS)]
    for k, point in enumerate(curves):
        cum_cost = float(trace.cum_cost[point.t - 1])
        values = [
            cum_cost - point.cost_T,
            float(trace.violation_series[point.t - 1]),
            point.cost_min,
            point.cost_T,
            point.cost_max,
            cum_cost,
            regret_bounds[k] if regret_bounds is not None else float("nan"),
            violation_bounds[k] if violation_bounds is not None else float("nan"),
        ]
        lines.append(" ".join([str(point.t), *(g17_filter(v) for v in values)]))
    return "\n".join(lines) + "\n"


def render_plot_script(title: str, data_file: str = "plot.dat", show_bounds: bool = True) -> str:
    return templates.get_template("plot.gp.j2").render(
        title=title,
        data_file=data_file,
        image_file=Path(data_file).with_suffix(".png").name,
        columns=PLOT_COLUMNS,
        show_bounds=show_bounds,
    )


def render_summary(summary: RunSummary) -> str:
    return summary.model_dump_json(indent=2) + "\n"


def render_sweep_csv(rows: Sequence[SweepRow]) -> str:
    return _lines([SWEEP_HEADER, *(row.cells() for row in rows)])


def monitor_status(reports: Sequence[MonitorReport]) -> str:
    """Run status; only gating monitors whose bounds are licensed can fail it."""
    return "fail" if any(not r.passed and r.gating and not r.extrapolated for r in reports) else "pass"


def write_artifacts(out_dir: Path, files: dict[str, str]) -> list[Path]:
    """Write rendered files under out_dir, creating it if needed."""
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, text in sorted(files.items()):
        path = out_dir / name
        path.write_bytes(text.encode("utf-8"))
        written.append(path)
        logger.debug("wrote %s (%d bytes)", path, len(text))
    return written
