"""
Application settings using Pydantic BaseSettings.
Tolerances, parallelism and logging are configured via environment variables.
"""

import os
from functools import lru_cache
from typing import Literal

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Simulator configuration loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
        populate_by_name=True,
    )

    # Application
    app_name: str = "Perturbed OCO Simulator"
    app_version: str = "0.1.0"
    debug: bool = False

    # Sweep parallelism (default: available cores)
    threads: int | None = Field(default=None, alias="OCO_THREADS")

    @field_validator("threads", mode="before")
    @classmethod
    def empty_str_to_none(cls, v):
        if v == "" or v is None:
            return None
        return v

    # Output
    output_dir: str = "runs"
    checkpoint_every: int = 100

    # Proximal subproblem solver
    prox_inner_tol: float = 1e-10
    prox_inner_max_iters: int = 10000

    # Hindsight solver (penalty continuation stages)
    hindsight_stages: int = 20

    # Absolute slack added on top of every bound before declaring a breach
    bound_tolerance: float = 1e-9

    # Seed for the instance samplers used by `verify`
    verify_seed: int = 20240601

    # Logging
    log_level: str = "INFO"
    log_format: Literal["json", "text"] = "text"

    @property
    def worker_count(self) -> int:
        """Number of sweep workers, capped by OCO_THREADS when set."""
        cores = os.cpu_count() or 1
        if self.threads is None or self.threads < 1:
            return cores
        return self.threads


@lru_cache
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()


settings = get_settings()
