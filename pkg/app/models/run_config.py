"""
Run configuration: one JSON document, overridable field by field from the CLI.
"""

import json
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, Field, field_validator

from app.settings import settings

SCENARIO_NAMES = ("datacenter", "static_lp", "all_feasible")
Algorithm = Literal["adaptive", "ogd", "fixed_rate", "static_averaged"]


class ScenarioConfig(BaseModel):
    """Which generator to build and how."""

    name: str = "datacenter"
    n: int = Field(default=10, ge=1)
    seed: int = Field(default=42, ge=0, lt=2**64)

    @field_validator("name")
    @classmethod
    def known_scenario(cls, v: str) -> str:
        if v not in SCENARIO_NAMES:
            raise ValueError(f"unknown scenario {v!r}; expected one of {', '.join(SCENARIO_NAMES)}")
        return v


class RunConfig(BaseModel):
    """Everything a run or sweep needs; validated before any compute."""

    scenario: ScenarioConfig = Field(default_factory=ScenarioConfig)
    algorithm: Algorithm = "adaptive"
    epsilon: float = Field(default=0.5, ge=0.0, lt=1.0)
    alpha: float = Field(default=1.0, gt=0.0)
    T: int = Field(default=1000, ge=1)
    checkpoint_every: int = Field(default_factory=lambda: settings.checkpoint_every, ge=1)
    output_dir: Path = Field(default_factory=lambda: Path(settings.output_dir))

    @classmethod
    def load(cls, path: str | Path | None = None, overrides: dict[str, Any] | None = None) -> "RunConfig":
        """Read the JSON document at `path` (if any) and apply flag overrides.

        Scenario overrides use the keys `scenario`, `n` and `seed`; `None`
        values leave the document untouched.
        """
        data: dict[str, Any] = {}
        if path is not None:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        scenario = dict(data.get("scenario") or {})
        for key, value in (overrides or {}).items():
            if value is None:
                continue
            if key == "scenario":
                scenario["name"] = value
            elif key in ("n", "seed"):
                scenario[key] = value
            else:
                data[key] = value
        data["scenario"] = scenario
        return cls.model_validate(data)
