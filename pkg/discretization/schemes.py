"""Stiffness matrices, right-hand sides, and the end-to-end solve of each scheme.

Every scheme here solves a system with the matrix

    M(d) = (d/h) S + C = tridiag(-d/h - 1/2, 2d/h, -d/h + 1/2)

where S = tridiag(-1, 2, -1) and C = tridiag(-1/2, 0, 1/2). The finite
difference route picks d = eps (1 + Phi(Pe)); the Petrov-Galerkin route picks
d = eps + b1*h. Matching the two is what makes the schemes comparable.
"""

from dataclasses import dataclass
from typing import Callable, Literal, Optional

import numpy as np
from loguru import logger

from discretization.bubbles import (
    BubbleSpec,
    evaluate_bubble,
    exponential_bubble,
    exponential_bubble_mean,
    peclet_coefficients,
)
from errors import InvalidArgumentError, InvalidDiffusionError
from numerics.quadrature import QuadratureRule, element_integrate, oracle_integrate
from numerics.tridiag import TridiagonalSystem, solve
from problems.mesh import Mesh
from problems.problem import GridFunction, Problem, interpolate_exact

DiffusionKind = Literal["central", "standard_upwind", "ias_sg", "from_bubble", "custom"]
RhsKind = Literal["pointwise", "bubble_quadrature", "bubble_oracle"]

# Relative tolerance when checking a bubble was built for the mesh at hand
_H_MATCH_RTOL = 1e-12


# ── Scheme description ───────────────────────────────────────────────────────

@dataclass(frozen=True)
class DiffusionRule:
    kind: DiffusionKind
    bubble: Optional[BubbleSpec] = None
    phi: Optional[Callable[[float], float]] = None
    name: str = ""

    @classmethod
    def central(cls) -> "DiffusionRule":
        return cls(kind="central", name="central")

    @classmethod
    def standard_upwind(cls) -> "DiffusionRule":
        return cls(kind="standard_upwind", name="upwind")

    @classmethod
    def ias_sg(cls) -> "DiffusionRule":
        return cls(kind="ias_sg", name="ias")

    @classmethod
    def from_bubble(cls, spec: BubbleSpec) -> "DiffusionRule":
        return cls(kind="from_bubble", bubble=spec, name=spec.label())

    @classmethod
    def custom(cls, phi: Callable[[float], float], name: str = "custom") -> "DiffusionRule":
        return cls(kind="custom", phi=phi, name=name)

    @property
    def is_exponential(self) -> bool:
        """True when the scheme uses the exponentially fitted matrix."""
        if self.kind == "ias_sg":
            return True
        return self.kind == "from_bubble" and self.bubble.kind == "exponential"

    def phi_value(self, pe: float) -> float:
        """Phi(Pe), the artificial diffusion relative to eps."""
        if self.kind == "central":
            return 0.0
        if self.kind == "standard_upwind":
            return pe
        if self.kind == "ias_sg":
            # pe coth(pe) - 1 = 2 pe b1(2 pe)
            return 2.0 * pe * exponential_bubble_mean(2.0 * pe)
        if self.kind == "from_bubble":
            return 2.0 * self.bubble.b1 * pe
        return float(self.phi(pe))


@dataclass(frozen=True)
class RhsRule:
    kind: RhsKind
    bubble: Optional[BubbleSpec] = None
    rule: Optional[QuadratureRule] = None
    tol: float = 1e-12

    @classmethod
    def pointwise(cls) -> "RhsRule":
        return cls(kind="pointwise")

    @classmethod
    def bubble_quadrature(cls, spec: BubbleSpec, rule: QuadratureRule) -> "RhsRule":
        return cls(kind="bubble_quadrature", bubble=spec, rule=rule)

    @classmethod
    def bubble_oracle(cls, spec: BubbleSpec, tol: float = 1e-12) -> "RhsRule":
        return cls(kind="bubble_oracle", bubble=spec, tol=tol)

    @property
    def label(self) -> str:
        if self.kind == "pointwise":
            return "pointwise"
        if self.kind == "bubble_oracle":
            return "oracle"
        return self.rule.name


@dataclass(frozen=True)
class SchemeConfig:
    diffusion: DiffusionRule
    rhs: RhsRule


@dataclass(frozen=True, eq=False)
class AssembledScheme:
    d: float
    matrix: TridiagonalSystem
    rhs: np.ndarray


# ── Artificial diffusion and matrices ────────────────────────────────────────

def _check_bubble_width(spec: BubbleSpec, h: float) -> None:
    if not np.isclose(spec.h, h, rtol=_H_MATCH_RTOL, atol=0.0):
        raise InvalidArgumentError(f"Bubble built for h={spec.h!r} used on a mesh with h={h!r}")


def artificial_diffusion(epsilon: float, h: float, rule: DiffusionRule) -> float:
    """eps_h = eps (1 + Phi(Pe)) with Pe = h / (2 eps)."""
    if not (epsilon > 0 and h > 0):
        raise InvalidArgumentError(f"epsilon and h must be positive, got {epsilon!r}, {h!r}")

    if rule.kind == "central":
        return epsilon
    if rule.kind == "standard_upwind":
        return epsilon + 0.5 * h
    if rule.kind == "ias_sg":
        return h / (2.0 * peclet_coefficients(epsilon, h).g0)
    if rule.kind == "from_bubble":
        _check_bubble_width(rule.bubble, h)
        return epsilon + rule.bubble.b1 * h

    pe = h / (2.0 * epsilon)
    phi = float(rule.phi(pe))
    if not phi >= 0:
        raise InvalidDiffusionError(f"Diffusion function {rule.name!r} returned Phi({pe:g}) = {phi!r}")
    return epsilon * (1.0 + phi)


def stiffness_matrix(mesh: Mesh) -> TridiagonalSystem:
    """S = tridiag(-1, 2, -1)."""
    return TridiagonalSystem.constant(mesh.size, -1.0, 2.0, -1.0)


def convection_matrix(mesh: Mesh) -> TridiagonalSystem:
    """C = tridiag(-1/2, 0, 1/2), skew-symmetric."""
    return TridiagonalSystem.constant(mesh.size, -0.5, 0.0, 0.5)


def assemble_system_matrix(d: float, mesh: Mesh) -> TridiagonalSystem:
    if not d > 0:
        raise InvalidArgumentError(f"Diffusion d must be positive, got {d!r}")
    ratio = d / mesh.h
    return TridiagonalSystem.constant(mesh.size, -ratio - 0.5, 2.0 * ratio, -ratio + 0.5)


def exponential_pg_matrix(epsilon: float, mesh: Mesh) -> TridiagonalSystem:
    """(1/g0) tridiag(-l_d, 1, -u_d); exactly tridiag(-1, 1, 0) once e^{-h/eps} is below roundoff."""
    c = peclet_coefficients(epsilon, mesh.h)
    return TridiagonalSystem.constant(mesh.size, -c.l_d / c.g0, 1.0 / c.g0, -c.u_d / c.g0)


# ── Right-hand sides ─────────────────────────────────────────────────────────

def assemble_rhs_pointwise(problem: Problem, mesh: Mesh) -> np.ndarray:
    return mesh.h * np.asarray(problem.source(mesh.interior), dtype=float)


def _bubble_rhs(problem: Problem, mesh: Mesh, spec: BubbleSpec, integrate) -> np.ndarray:
    """Entry j: int f (phi_j + B_j) over [x_{j-1}, x_j] plus int f (phi_j - B_{j+1}) over [x_j, x_{j+1}].

    Both integrals run in the local coordinate s in [0, h] of their element.
    """
    _check_bubble_width(spec, mesh.h)
    f = problem.source
    h = mesh.h
    nodes = mesh.nodes
    out = np.empty(mesh.size)
    for j in range(1, mesh.n):
        left, centre = nodes[j - 1], nodes[j]
        rising = integrate(lambda s: f(left + s) * (s / h + evaluate_bubble(spec, s)), h)
        falling = integrate(lambda s: f(centre + s) * (1.0 - s / h - evaluate_bubble(spec, s)), h)
        out[j - 1] = rising + falling
    return out


def assemble_rhs_bubble(problem: Problem, mesh: Mesh, spec: BubbleSpec, rule: QuadratureRule) -> np.ndarray:
    return _bubble_rhs(problem, mesh, spec, lambda g, h: element_integrate(rule, g, 0.0, h))


def assemble_rhs_oracle(problem: Problem, mesh: Mesh, spec: BubbleSpec, tol: float = 1e-12) -> np.ndarray:
    """Petrov-Galerkin load vector with oracle-quality element integrals."""
    return _bubble_rhs(problem, mesh, spec, lambda g, h: oracle_integrate(g, 0.0, h, tol=tol))


def cs_closed_form_rhs(problem: Problem, mesh: Mesh, spec: BubbleSpec) -> np.ndarray:
    """Cavalieri-Simpson load vector in closed form.

    G_j = (h/3) [(1 + 2 B(h/2)) f(x_j - h/2) + f(x_j) + (1 - 2 B(h/2)) f(x_j + h/2)]
    """
    _check_bubble_width(spec, mesh.h)
    h = mesh.h
    x = mesh.interior
    f = problem.source
    m = spec.midpoint
    return (h / 3.0) * ((1.0 + 2.0 * m) * f(x - h / 2.0) + f(x) + (1.0 - 2.0 * m) * f(x + h / 2.0))


def assemble_rhs(rule: RhsRule, problem: Problem, mesh: Mesh) -> np.ndarray:
    if rule.kind == "pointwise":
        return assemble_rhs_pointwise(problem, mesh)
    if rule.kind == "bubble_quadrature":
        return assemble_rhs_bubble(problem, mesh, rule.bubble, rule.rule)
    return assemble_rhs_oracle(problem, mesh, rule.bubble, tol=rule.tol)


# ── Solve ────────────────────────────────────────────────────────────────────

def assemble_scheme(config: SchemeConfig, problem: Problem, mesh: Mesh) -> AssembledScheme:
    diffusion = config.diffusion
    d = artificial_diffusion(problem.epsilon, mesh.h, diffusion)

    if diffusion.is_exponential:
        bubble = diffusion.bubble
        if bubble is not None and not np.isclose(bubble.epsilon, problem.epsilon, rtol=_H_MATCH_RTOL, atol=0.0):
            raise InvalidArgumentError(
                f"Exponential bubble built for eps={bubble.epsilon!r} used with eps={problem.epsilon!r}"
            )
        matrix = exponential_pg_matrix(problem.epsilon, mesh)
    else:
        matrix = assemble_system_matrix(d, mesh)

    rhs = assemble_rhs(config.rhs, problem, mesh)
    logger.debug(
        f"Assembled {diffusion.name or diffusion.kind}/{config.rhs.label} for {problem.name!r}: "
        f"n={mesh.n}, d={d:.6g}"
    )
    return AssembledScheme(d=d, matrix=matrix, rhs=rhs)


def solve_scheme(
    config: SchemeConfig,
    problem: Problem,
    mesh: Mesh,
    pivot_threshold: float = 1e-300,
    residual_rtol: Optional[float] = None,
) -> GridFunction:
    assembled = assemble_scheme(config, problem, mesh)
    values = solve(
        assembled.matrix,
        assembled.rhs,
        pivot_threshold=pivot_threshold,
        residual_rtol=residual_rtol,
    )
    return GridFunction(mesh, values)


def exponential_config(epsilon: float, mesh: Mesh, tol: float = 1e-12) -> SchemeConfig:
    """Exponential bubble with oracle load vector: nodally exact for any f."""
    spec = exponential_bubble(epsilon, mesh.h)
    return SchemeConfig(DiffusionRule.from_bubble(spec), RhsRule.bubble_oracle(spec, tol=tol))


def reference_interpolant(problem: Problem, mesh: Mesh, tol: float = 1e-12) -> GridFunction:
    """I_h(u): closed form when available, else the nodally exact exponential scheme."""
    if problem.has_exact:
        return interpolate_exact(problem, mesh)
    logger.warning(
        f"Problem {problem.name!r} has no closed-form solution; "
        f"using the exponential scheme with oracle load vector as reference (n={mesh.n})"
    )
    return solve_scheme(exponential_config(problem.epsilon, mesh, tol=tol), problem, mesh)


def underflow_limit_solution(problem: Problem, mesh: Mesh, tol: float = 1e-12) -> GridFunction:
    """w(x_j) = int_0^{x_j} f, which the exponential scheme returns once e^{-h/eps} underflows."""
    f = problem.source
    nodes = mesh.nodes
    pieces = [oracle_integrate(f, nodes[j - 1], nodes[j], tol=tol) for j in range(1, mesh.n)]
    return GridFunction(mesh, np.cumsum(pieces))
