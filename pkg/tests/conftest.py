"""Shared fixtures for the simulator tests."""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pytest

from app.models.action_set import Box
from app.models.bregman import HalfSquaredEuclidean
from app.models.constraints import AffineConstraints
from app.models.problem import AssumptionConstants, ProblemSpec
from app.models.trace import RunTrace
from app.services.engines import run
from app.services.metrics import TheoremConstants
from app.services.oracle import HindsightCosts, hindsight_curves
from app.services.scenarios import datacenter_scenario

SWEEP_EPSILONS = (0.0, 0.25, 0.5, 0.75)
SWEEP_T = 25_000
GOLDEN_PATH = Path(__file__).parent / "golden_values.json"


@dataclass
class SweepRun:
    spec: ProblemSpec
    trace: RunTrace
    curves: list[HindsightCosts]
    tc: TheoremConstants


@pytest.fixture(scope="session")
def datacenter_sweep() -> dict[float, SweepRun]:
    """Datacenter n=10, seed 42, T=25000 for each epsilon."""
    runs = {}
    for epsilon in SWEEP_EPSILONS:
        stream = datacenter_scenario(10, 42)
        trace = run(stream.spec, stream, epsilon, SWEEP_T)
        curves = hindsight_curves(stream.spec, trace, 1000)
        runs[epsilon] = SweepRun(stream.spec, trace, curves, TheoremConstants.from_spec(stream.spec))
    return runs


@pytest.fixture
def unit_box_spec():
    """One covering row <x, 1> >= b on [0, 1]^2."""
    consts = AssumptionConstants(D=2**0.5, F_star=2**0.5, G_star=2.0, G=2.0, eta=1.0, slater_point=np.ones(2))
    return ProblemSpec(
        action_set=Box.unit(2),
        constraints=AffineConstraints.covering(np.ones(2)),
        psi=HalfSquaredEuclidean(),
        phi=HalfSquaredEuclidean(),
        consts=consts,
    )


def _bare_trace(bs, ys=None, n: int = 1) -> RunTrace:
    bs = np.asarray(bs, dtype=np.float64)
    T, m = bs.shape
    ys = np.zeros((T, m)) if ys is None else np.asarray(ys, dtype=np.float64)
    return RunTrace(
        xs=np.zeros((T, n)),
        ys=ys,
        rhos=np.ones(T),
        f_values=np.zeros(T),
        bs=bs,
        gs=np.zeros((T, m)),
        costs=[None] * T,
        algorithm="adaptive",
    )


@pytest.fixture
def make_trace():
    """Factory for bare traces carrying only perturbations and duals."""
    return _bare_trace


class GoldenStore:
    """Regression values keyed by name.

    A key missing from the file is recorded from the current run; afterwards
    every run must reproduce it.
    """

    def __init__(self, path: Path):
        self.path = path
        self.values = json.loads(path.read_text()) if path.exists() else {}
        self.recorded: list[str] = []

    def check(self, key: str, value: float) -> None:
        if key not in self.values:
            self.values[key] = value
            self.recorded.append(key)
            return
        assert value == pytest.approx(self.values[key], rel=1e-12, abs=1e-12), key

    def save(self) -> None:
        if self.recorded:
            self.path.write_text(json.dumps(self.values, indent=2, sort_keys=True) + "\n")


@pytest.fixture(scope="session")
def golden():
    store = GoldenStore(GOLDEN_PATH)
    yield store
    store.save()
