"""Problem registry: built-in closed-form problems plus tabulated sources from YAML.

Tabulated problems carry no expression: the YAML gives source values on a
uniform grid of [0, 1] and the source is their piecewise linear interpolant.

    problems:
      - id: ramp
        description: "f decreasing linearly from 1 to 0"
        values: [1.0, 0.0]
        deriv_bounds: [1.0, 0.0]     # optional (sup|f'|, sup|f''|)
"""

from pathlib import Path
from typing import Callable, Optional

import numpy as np
import yaml
from loguru import logger
from pydantic import BaseModel, ValidationError, field_validator

from errors import InvalidArgumentError, UsageError
from problems.problem import Problem, test_problem_f2x, test_problem_zero

BUILTIN_PROBLEMS: dict[str, Callable[[float], Problem]] = {
    "f2x": test_problem_f2x,
    "fzero": test_problem_zero,
}

BUILTIN_DESCRIPTIONS: dict[str, str] = {
    "f2x": "f(x) = 2x, closed-form solution with an outflow layer at x = 1",
    "fzero": "f = 0, solution identically zero",
}


class TabulatedProblem(BaseModel):
    id: str
    description: str = ""
    values: list[float]
    deriv_bounds: Optional[tuple[float, float]] = None

    @field_validator("values")
    @classmethod
    def _enough_values(cls, v: list[float]) -> list[float]:
        if len(v) < 2:
            raise ValueError(f"A tabulated source needs at least 2 values, got {len(v)}")
        if not np.all(np.isfinite(v)):
            raise ValueError("Tabulated source values must be finite")
        return v

    def source(self) -> Callable[[np.ndarray], np.ndarray]:
        grid = np.linspace(0.0, 1.0, len(self.values))
        table = np.asarray(self.values, dtype=float)

        def interpolated(x: np.ndarray) -> np.ndarray:
            return np.interp(np.asarray(x, dtype=float), grid, table)

        return interpolated

    def build(self, epsilon: float) -> Problem:
        return Problem(
            epsilon=epsilon,
            source=self.source(),
            source_deriv_bounds=self.deriv_bounds,
            name=self.id,
        )


def load_tabulated_problems(path: Optional[Path]) -> dict[str, TabulatedProblem]:
    """Parse the problems file; a missing file yields no tabulated problems."""
    if path is None or not Path(path).exists():
        logger.debug(f"No problems file at {path}; only built-in problems available")
        return {}

    with open(path, encoding="utf-8") as f:
        raw = yaml.safe_load(f) or {}

    entries: dict[str, TabulatedProblem] = {}
    for item in raw.get("problems", []):
        try:
            entry = TabulatedProblem(**item)
        except ValidationError as e:
            raise InvalidArgumentError(f"Invalid problem entry in {path}: {e}") from e
        if entry.id in BUILTIN_PROBLEMS or entry.id in entries:
            raise InvalidArgumentError(f"Duplicate problem id {entry.id!r} in {path}")
        entries[entry.id] = entry

    logger.debug(f"Loaded {len(entries)} tabulated problems from {path}")
    return entries


def list_problems(problems_file: Optional[Path] = None) -> list[tuple[str, str]]:
    """(id, description) for every registered problem, built-ins first."""
    listed = list(BUILTIN_DESCRIPTIONS.items())
    for entry in load_tabulated_problems(problems_file).values():
        listed.append((entry.id, entry.description or f"tabulated, {len(entry.values)} values"))
    return listed


def get_problem(problem_id: str, epsilon: float, problems_file: Optional[Path] = None) -> Problem:
    if problem_id in BUILTIN_PROBLEMS:
        return BUILTIN_PROBLEMS[problem_id](epsilon)

    tabulated = load_tabulated_problems(problems_file)
    if problem_id in tabulated:
        return tabulated[problem_id].build(epsilon)

    known = ", ".join([*BUILTIN_PROBLEMS, *tabulated])
    raise UsageError(f"Unknown problem: {problem_id!r} (known: {known})")
