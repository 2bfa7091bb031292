"""Elementwise quadrature rules, the composite trapezoid functional, and an oracle integrator.

Rules are tabulated once on the reference interval [0, 1] and mapped
affinely onto each element:

    int_a^b g(x) dx  ~  (b - a) * sum_k w_k g(a + (b - a) t_k)

Integrands are vectorised callables (numpy arrays in, arrays out).
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np
from loguru import logger

from errors import InvalidArgumentError, NoConvergenceError
from problems.mesh import Mesh

Integrand = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class QuadratureRule:
    name: str
    ref_nodes: tuple[float, ...]
    weights: tuple[float, ...]
    exactness_degree: int


TRAPEZOID = QuadratureRule(
    name="trapezoid",
    ref_nodes=(0.0, 1.0),
    weights=(0.5, 0.5),
    exactness_degree=1,
)

CAVALIERI_SIMPSON = QuadratureRule(
    name="cavalieri_simpson",
    ref_nodes=(0.0, 0.5, 1.0),
    weights=(1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0),
    exactness_degree=3,
)

# Legendre roots 0, +-sqrt(3/5) mapped to [0, 1]; weights 5/18, 8/18, 5/18
GAUSS3 = QuadratureRule(
    name="gauss3",
    ref_nodes=(0.11270166537925831, 0.5, 0.88729833462074169),
    weights=(0.27777777777777778, 0.44444444444444444, 0.27777777777777778),
    exactness_degree=5,
)

RULES: dict[str, QuadratureRule] = {
    rule.name: rule for rule in (TRAPEZOID, CAVALIERI_SIMPSON, GAUSS3)
}


def get_rule(name: str) -> QuadratureRule:
    try:
        return RULES[name]
    except KeyError:
        raise InvalidArgumentError(
            f"Unknown quadrature rule: {name!r} (known: {', '.join(RULES)})"
        ) from None


def composite_trapezoid(theta: Integrand, mesh: Mesh) -> float:
    """T_n(theta) = h * sum_{i=1}^{n-1} theta(x_i).

    Endpoint values are not sampled; the formula assumes theta(0) = theta(1) = 0.
    """
    return float(mesh.h * np.sum(theta(mesh.interior)))


def element_integrate(rule: QuadratureRule, g: Integrand, a: float, b: float) -> float:
    """Apply one rule on a single element [a, b]."""
    if not a < b:
        raise InvalidArgumentError(f"Element needs a < b, got [{a!r}, {b!r}]")
    width = b - a
    points = a + width * np.asarray(rule.ref_nodes)
    return float(width * np.dot(rule.weights, g(points)))


def composite_integrate(
    rule: QuadratureRule,
    g: Integrand,
    a: float,
    b: float,
    n_sub: int,
) -> float:
    """Apply the rule on n_sub equal subintervals of [a, b]."""
    if not a < b:
        raise InvalidArgumentError(f"Interval needs a < b, got [{a!r}, {b!r}]")
    if n_sub < 1:
        raise InvalidArgumentError(f"Need at least one subinterval, got {n_sub}")
    width = (b - a) / n_sub
    left = a + width * np.arange(n_sub)
    points = left[:, None] + width * np.asarray(rule.ref_nodes)[None, :]
    values = np.asarray(g(points.ravel()), dtype=float).reshape(points.shape)
    return float(width * np.sum(values @ np.asarray(rule.weights)))


def oracle_integrate(
    g: Integrand,
    a: float,
    b: float,
    tol: float = 1e-12,
    max_subintervals: int = 2**20,
    min_tol: float = 1e-14,
) -> float:
    """High-accuracy reference integral.

    Composite gauss3 with the subinterval count doubled until two successive
    values agree within tol (absolute); the finer value is returned. Doubling
    places every split at a dyadic point of [a, b], so kinks there are
    resolved exactly once the mesh reaches them.
    """
    if tol < min_tol:
        raise InvalidArgumentError(f"Oracle tolerance {tol!r} is below the floor {min_tol!r}")
    if a == b:
        return 0.0
    if a > b:
        raise InvalidArgumentError(f"Interval needs a <= b, got [{a!r}, {b!r}]")

    n_sub = 1
    previous = composite_integrate(GAUSS3, g, a, b, n_sub)
    while True:
        n_sub *= 2
        if n_sub > max_subintervals:
            raise NoConvergenceError(
                f"Oracle integral on [{a!r}, {b!r}] did not reach tol={tol!r} "
                f"within {max_subintervals} subintervals"
            )
        current = composite_integrate(GAUSS3, g, a, b, n_sub)
        if abs(current - previous) <= tol:
            if n_sub > 4096:
                logger.debug(f"Oracle needed {n_sub} subintervals on [{a!r}, {b!r}]")
            return current
        previous = current
