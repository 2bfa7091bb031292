"""Shared fixtures: seeded generators, configs writing to tmp paths, grid functions."""

import numpy as np
import pytest

from config import Config, LoggingConfig
from problems.mesh import make_uniform_mesh
from problems.problem import GridFunction, Problem


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def cfg(tmp_path):
    """Default configuration with the run log redirected under tmp_path."""
    return Config(logging=LoggingConfig(log_file=str(tmp_path / "runs.jsonl")))


@pytest.fixture
def random_grid(rng):
    def make(n: int) -> GridFunction:
        mesh = make_uniform_mesh(n)
        return GridFunction(mesh, rng.uniform(-1.0, 1.0, mesh.size))

    return make


@pytest.fixture
def constant_problem():
    def make(epsilon: float) -> Problem:
        return Problem(epsilon=epsilon, source=lambda x: np.ones_like(np.asarray(x, dtype=float)), name="one")

    return make


@pytest.fixture
def const_one_exact():
    """Solution of -eps u'' + u' = 1, u(0) = u(1) = 0, in overflow-safe form."""

    def exact(x, epsilon):
        x = np.asarray(x, dtype=float)
        tail = np.exp(-1.0 / epsilon)
        return x - (np.exp((x - 1.0) / epsilon) - tail) / -np.expm1(-1.0 / epsilon)

    return exact
