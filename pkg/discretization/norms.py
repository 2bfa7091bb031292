"""Norms and seminorms on the discrete space of continuous piecewise linears.

All functions take grid functions (interior nodal values, homogeneous
boundary values implied) and evaluate their formulas exactly in the nodal
values; no quadrature is involved except for the functional dual norms at
the bottom, which need integrals of the source.
"""

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from loguru import logger

from discretization.bubbles import BubbleSpec, peclet_coefficients
from discretization.schemes import assemble_rhs_oracle, assemble_system_matrix, stiffness_matrix
from errors import InvalidArgumentError, NumericalInconsistencyError
from numerics.quadrature import oracle_integrate
from numerics.tridiag import apply, solve
from problems.mesh import Mesh
from problems.problem import GridFunction, Problem

Reference = Union[GridFunction, Callable[[np.ndarray], np.ndarray]]


def h1_seminorm(u: GridFunction) -> float:
    """|u| = ||u'||_{L^2}."""
    slopes = np.diff(u.with_boundary())
    return float(np.sqrt(np.sum(slopes**2) / u.mesh.h))


def l2_norm(u: GridFunction) -> float:
    full = u.with_boundary()
    a, b = full[:-1], full[1:]
    return float(np.sqrt(np.sum(u.mesh.h / 3.0 * (a * a + a * b + b * b))))


def star_seminorm(u: GridFunction, clamp_tol: float = 1e-14, fail_tol: float = 1e-12) -> float:
    """|u|_{*,h}: spread of the element averages of u around their mean.

    |u|^2_{*,h} = (1/n) sum_i (avg_i)^2 - (int_0^1 u)^2, avg_i = (u_{i-1} + u_i)/2.
    Roundoff can push the difference slightly below zero; it is clamped when
    the deficit is under fail_tol relative to the first term.
    """
    h = u.mesh.h
    full = u.with_boundary()
    averages = 0.5 * (full[:-1] + full[1:])
    mean_square = h * np.sum(averages**2)
    total = h * np.sum(averages)
    value = mean_square - total**2

    if value < 0:
        scale = mean_square if mean_square > 0 else 1.0
        if value < -fail_tol * scale:
            raise NumericalInconsistencyError(
                f"Star seminorm squared is negative beyond roundoff: {value!r} (scale {scale!r})"
            )
        if value < -clamp_tol * scale:
            logger.warning(f"Clamping star seminorm squared {value:.3e} to zero")
        value = 0.0
    return float(np.sqrt(value))


def optimal_trial_norm(u: GridFunction, d: float) -> float:
    """||u||_{*,h} = sqrt(d^2 |u|^2 + |u|^2_{*,h})."""
    if not d > 0:
        raise InvalidArgumentError(f"Diffusion d must be positive, got {d!r}")
    return float(np.sqrt(d * d * h1_seminorm(u) ** 2 + star_seminorm(u) ** 2))


def dual_norm(coeffs, mesh: Mesh, pivot_threshold: float = 1e-300) -> float:
    """sup_v F(v)/|v| for the functional with values coeffs on the hat basis.

    The Riesz representative w solves (S/h) w = F, and the norm is sqrt(F.w).
    """
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (mesh.size,):
        raise InvalidArgumentError(f"Functional of shape {coeffs.shape} does not match n={mesh.n}")
    gram = stiffness_matrix(mesh).scaled(1.0 / mesh.h)
    riesz = solve(gram, coeffs, pivot_threshold=pivot_threshold)
    return float(np.sqrt(max(float(np.dot(coeffs, riesz)), 0.0)))


def bilinear_form_functional(u: GridFunction, d: float) -> np.ndarray:
    """F_j = b_d(phi_j, u) = d a_0(u, phi_j) + (u', phi_j), i.e. ((d/h) S + C) U."""
    return apply(assemble_system_matrix(d, u.mesh), u.values)


def optimal_trial_norm_via_sup(u: GridFunction, d: float) -> float:
    """sup_v b_d(v, u)/|v|, evaluated as the dual norm of b_d(., u)."""
    return dual_norm(bilinear_form_functional(u, d), u.mesh)


def discrete_inf_distance(u: GridFunction, reference: Reference, layer_nodes: int = 0) -> float:
    """max_j |u_j - reference(x_j)| over interior nodes.

    layer_nodes > 0 leaves out that many nodes next to the outflow boundary x = 1.
    """
    if isinstance(reference, GridFunction):
        if not u.mesh.same_as(reference.mesh):
            raise InvalidArgumentError(
                f"Grid functions live on different meshes (n={u.mesh.n} vs n={reference.mesh.n})"
            )
        ref_values = reference.values
    else:
        ref_values = np.asarray(reference(u.mesh.interior), dtype=float)

    if layer_nodes < 0:
        raise InvalidArgumentError(f"layer_nodes must be non-negative, got {layer_nodes!r}")
    keep = u.mesh.size - layer_nodes
    if keep < 1:
        raise InvalidArgumentError(f"Excluding {layer_nodes} layer nodes leaves no node on n={u.mesh.n}")
    return float(np.max(np.abs(u.values[:keep] - ref_values[:keep])))


@dataclass(frozen=True)
class InfNormChain:
    max_nodal: float      # max_j |u_j|
    h1: float             # |u|
    scaled_trial: float   # (2 g0 / h) ||u||_{*,h} with d = h/(2 g0)

    @property
    def holds(self) -> bool:
        slack = 1e-12 * max(self.scaled_trial, 1.0)
        return self.max_nodal <= self.h1 + slack and self.h1 <= self.scaled_trial + slack


def inf_norm_chain(u: GridFunction, epsilon: float) -> InfNormChain:
    """max|u_j| <= |u| <= (2 g0/h) ||u||_{*,h} for the exponentially fitted diffusion."""
    h = u.mesh.h
    g0 = peclet_coefficients(epsilon, h).g0
    d = h / (2.0 * g0)
    return InfNormChain(
        max_nodal=float(np.max(np.abs(u.values))),
        h1=h1_seminorm(u),
        scaled_trial=(2.0 * g0 / h) * optimal_trial_norm(u, d),
    )


# ── Functionals of the source ────────────────────────────────────────────────

def hat_moments(problem: Problem, mesh: Mesh, tol: float = 1e-12) -> np.ndarray:
    """int_0^1 f phi_j for every interior hat, by oracle integration per element."""
    f = problem.source
    h = mesh.h
    nodes = mesh.nodes
    out = np.empty(mesh.size)
    for j in range(1, mesh.n):
        left, centre = nodes[j - 1], nodes[j]
        rising = oracle_integrate(lambda s: f(left + s) * (s / h), 0.0, h, tol=tol)
        falling = oracle_integrate(lambda s: f(centre + s) * (1.0 - s / h), 0.0, h, tol=tol)
        out[j - 1] = rising + falling
    return out


def trapezoid_functional_dual_norm(problem: Problem, mesh: Mesh, tol: float = 1e-12) -> float:
    """Dual norm of w -> int f w - T_n(f w), the trapezoid error functional."""
    values = hat_moments(problem, mesh, tol=tol) - mesh.h * problem.source(mesh.interior)
    return dual_norm(values, mesh)


def bubble_functional_dual_norm(problem: Problem, mesh: Mesh, spec: BubbleSpec, tol: float = 1e-12) -> float:
    """Dual norm of w -> int f (B-part of the test function), W_j = int f (B_j - B_{j+1})."""
    values = assemble_rhs_oracle(problem, mesh, spec, tol=tol) - hat_moments(problem, mesh, tol=tol)
    return dual_norm(values, mesh)
