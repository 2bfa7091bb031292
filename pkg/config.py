"""Central configuration loader.

Reads config.yaml, applies environment variable overrides, and exposes a
typed Config object via get_config(). Numerical modules take their
tolerances as keyword arguments; the experiment layer and the CLI pull the
configured values from here and pass them through.
"""

import os
from functools import lru_cache
from pathlib import Path
from typing import Literal

import yaml
from pydantic import BaseModel, field_validator

CONFIG_PATH = Path(__file__).parent / "config.yaml"


class SolverConfig(BaseModel):
    pivot_threshold: float = 1e-300
    residual_rtol: float = 1e-12


class QuadratureConfig(BaseModel):
    oracle_tol: float = 1e-12

    @field_validator("oracle_tol")
    @classmethod
    def _tol_positive(cls, v: float) -> float:
        if v <= 0:
            raise ValueError(f"oracle_tol must be positive, got {v!r}")
        return v


class ExperimentsConfig(BaseModel):
    default_epsilon: float = 1e-6
    default_n_list: list[int] = [100, 200, 400, 800, 1600]
    sampling_factor: int = 10
    layer_nodes: int = 0
    underflow_ratio: float = 36.05
    recommended_ratio: float = 30.0
    max_workers: int = 1
    reference_tol: float = 1e-10
    problems_file: str = "data/problems.yaml"

    @field_validator("default_n_list")
    @classmethod
    def _n_list_increasing(cls, v: list[int]) -> list[int]:
        if any(b <= a for a, b in zip(v, v[1:])) or any(n < 2 for n in v):
            raise ValueError(f"default_n_list must be strictly increasing and >= 2, got {v!r}")
        return v


class OutputConfig(BaseModel):
    format: Literal["csv", "json"] = "csv"
    significant_digits: int = 17
    results_dir: str = "results"


class LoggingConfig(BaseModel):
    level: str = "INFO"
    log_runs: bool = True
    log_file: str = "logs/runs.jsonl"


class AppConfig(BaseModel):
    title: str = "Convection-diffusion FD/FE laboratory"
    version: str = "0.1.0"


class Config(BaseModel):
    solver: SolverConfig = SolverConfig()
    quadrature: QuadratureConfig = QuadratureConfig()
    experiments: ExperimentsConfig = ExperimentsConfig()
    output: OutputConfig = OutputConfig()
    logging: LoggingConfig = LoggingConfig()
    app: AppConfig = AppConfig()


def _apply_env_overrides(raw: dict) -> dict:
    """Apply environment variable overrides to the raw config dict."""
    env_map = {
        "LAB_LOG_LEVEL": ("logging", "level"),
        "LAB_ORACLE_TOL": ("quadrature", "oracle_tol"),
        "LAB_PROBLEMS_FILE": ("experiments", "problems_file"),
        "LAB_MAX_WORKERS": ("experiments", "max_workers"),
        "LAB_OUTPUT_FORMAT": ("output", "format"),
    }
    for env_key, (section, field) in env_map.items():
        if env_key in os.environ:
            raw.setdefault(section, {})[field] = os.environ[env_key]
    return raw


@lru_cache(maxsize=1)
def get_config() -> Config:
    """Load and return the cached Config singleton."""
    raw: dict = {}
    if CONFIG_PATH.exists():
        with open(CONFIG_PATH) as f:
            raw = yaml.safe_load(f) or {}
    raw = _apply_env_overrides(raw)
    return Config(**raw)


def resolve_path(relative: str) -> Path:
    """Resolve a config path relative to the repository root."""
    path = Path(relative)
    return path if path.is_absolute() else CONFIG_PATH.parent / path
