"""Model problems -eps*u'' + u' = f on (0, 1), u(0) = u(1) = 0, and grid functions.

Sources and exact solutions are vectorised callables: they take a numpy
array of abscissae and return an array of the same shape.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from loguru import logger

from errors import InvalidArgumentError, UnsupportedProblemError
from numerics.quadrature import oracle_integrate
from problems.mesh import Mesh

Source = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Problem:
    epsilon: float
    source: Source
    source_deriv_bounds: Optional[tuple[float, float]] = None   # (sup|f'|, sup|f''|)
    exact: Optional[Source] = None
    name: str = "custom"
    kappa: float = 1.0

    def __post_init__(self) -> None:
        if not self.epsilon > 0:
            raise InvalidArgumentError(f"epsilon must be positive, got {self.epsilon!r}")
        if self.kappa != 1.0:
            raise UnsupportedProblemError(
                f"Only the normalised convection coefficient kappa=1 is supported, got {self.kappa!r}"
            )

    @property
    def has_exact(self) -> bool:
        return self.exact is not None


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Interior nodal values u_1..u_{n-1}; u_0 = u_n = 0 are implied.

    Identified with the continuous piecewise linear function through the nodes.
    """

    mesh: Mesh
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        if values.shape != (self.mesh.size,):
            raise InvalidArgumentError(
                f"GridFunction on n={self.mesh.n} needs {self.mesh.size} values, got shape {values.shape}"
            )
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, mesh: Mesh) -> "GridFunction":
        return cls(mesh, np.zeros(mesh.size))

    def with_boundary(self) -> np.ndarray:
        """Nodal values u_0..u_n including the homogeneous boundary values."""
        return np.concatenate(([0.0], self.values, [0.0]))

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return np.interp(x, self.mesh.nodes, self.with_boundary())

    def _check_mesh(self, other: "GridFunction") -> None:
        if not self.mesh.same_as(other.mesh):
            raise InvalidArgumentError(
                f"Grid functions live on different meshes (n={self.mesh.n} vs n={other.mesh.n})"
            )

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        self._check_mesh(other)
        return GridFunction(self.mesh, self.values - other.values)

    def __add__(self, other: "GridFunction") -> "GridFunction":
        self._check_mesh(other)
        return GridFunction(self.mesh, self.values + other.values)


def test_problem_f2x(epsilon: float) -> Problem:
    """f(x) = 2x with its closed-form solution.

    u(x) = x^2 + 2 eps x - (1 + 2 eps) (e^{(x-1)/eps} - e^{-1/eps}) / (1 - e^{-1/eps})
    Only negative exponents appear, so small eps cannot overflow.
    """
    if not epsilon > 0:
        raise InvalidArgumentError(f"epsilon must be positive, got {epsilon!r}")

    def source(x: np.ndarray) -> np.ndarray:
        return 2.0 * np.asarray(x, dtype=float)

    def exact(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        tail = np.exp(-1.0 / epsilon)
        layer = (np.exp((x - 1.0) / epsilon) - tail) / -np.expm1(-1.0 / epsilon)
        return x * x + 2.0 * epsilon * x - (1.0 + 2.0 * epsilon) * layer

    return Problem(
        epsilon=epsilon,
        source=source,
        source_deriv_bounds=(2.0, 0.0),
        exact=exact,
        name="f2x",
    )


def test_problem_zero(epsilon: float) -> Problem:
    """f = 0, whose solution is identically zero."""

    def zero(x: np.ndarray) -> np.ndarray:
        return np.zeros_like(np.asarray(x, dtype=float))

    return Problem(
        epsilon=epsilon,
        source=zero,
        source_deriv_bounds=(0.0, 0.0),
        exact=zero,
        name="fzero",
    )


# pytest would otherwise collect the factories above as tests
test_problem_f2x.__test__ = False
test_problem_zero.__test__ = False


def interpolate_exact(problem: Problem, mesh: Mesh) -> GridFunction:
    """Nodal interpolant I_h(u) of the closed-form solution."""
    if problem.exact is None:
        raise UnsupportedProblemError(f"Problem {problem.name!r} has no closed-form solution")
    return GridFunction(mesh, problem.exact(mesh.interior))


def source_bounds(problem: Problem, mesh: Mesh, factor: int = 10) -> tuple[float, float]:
    """(sup|f'|, sup|f''|): analytic when the problem carries them, else sampled.

    Sampling uses divided differences on a factor*n point grid over [0, 1].
    """
    if problem.source_deriv_bounds is not None:
        return problem.source_deriv_bounds
    points = max(factor * mesh.n, 3)
    x = np.linspace(0.0, 1.0, points)
    dx = x[1] - x[0]
    fx = problem.source(x)
    d1 = np.max(np.abs(np.diff(fx))) / dx
    d2 = np.max(np.abs(np.diff(fx, n=2))) / dx**2
    logger.warning(
        f"Source bounds for {problem.name!r} estimated on {points} samples: "
        f"sup|f'|~{d1:.3e}, sup|f''|~{d2:.3e}"
    )
    return float(d1), float(d2)


def source_l2_norm(problem: Problem, tol: float = 1e-12) -> float:
    """||f||_{L^2(0,1)} by the oracle integrator."""
    f = problem.source
    return float(np.sqrt(oracle_integrate(lambda x: f(x) ** 2, 0.0, 1.0, tol=tol)))
