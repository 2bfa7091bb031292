"""Mesh-independent scheme variants, as named on the command line.

A SchemeVariant names a diffusion rule and a load-vector rule; build()
turns it into a concrete SchemeConfig once the problem and mesh are known,
since bubbles depend on h (and eps for the exponential kind).

Scheme ids: central | upwind | ias | quadratic-bubble (needs beta) | exp-bubble
Rhs ids:    pointwise | trapezoid | cs | gauss3 | oracle
"""

from dataclasses import dataclass
from typing import Optional

from discretization.bubbles import (
    BubbleSpec,
    beta_for_phi,
    exponential_bubble,
    quadratic_bubble,
)
from discretization.schemes import DiffusionRule, RhsRule, SchemeConfig
from errors import UsageError
from numerics.quadrature import CAVALIERI_SIMPSON, GAUSS3, TRAPEZOID, QuadratureRule
from problems.mesh import Mesh
from problems.problem import Problem

SCHEME_IDS = ("central", "upwind", "ias", "quadratic-bubble", "exp-bubble")

RHS_RULES: dict[str, Optional[QuadratureRule]] = {
    "pointwise": None,
    "trapezoid": TRAPEZOID,
    "cs": CAVALIERI_SIMPSON,
    "gauss3": GAUSS3,
    "oracle": None,
}

# Named methods of the reference tables: (scheme, rhs, beta)
PRESETS: dict[str, tuple[str, str, Optional[float]]] = {
    "T-FD": ("upwind", "pointwise", None),
    "CS-FD": ("quadratic-bubble", "cs", 0.75),
    "G3-FD": ("quadratic-bubble", "gauss3", 0.75),
    "PG-oracle": ("quadratic-bubble", "oracle", 0.75),
    "EXP-T": ("exp-bubble", "trapezoid", None),
    "EXP-CS": ("exp-bubble", "cs", None),
    "EXP-G3": ("exp-bubble", "gauss3", None),
    "EXP-oracle": ("exp-bubble", "oracle", None),
}


@dataclass(frozen=True)
class SchemeVariant:
    scheme: str
    rhs: str
    beta: Optional[float] = None
    oracle_tol: float = 1e-12

    @property
    def scheme_label(self) -> str:
        if self.scheme == "quadratic-bubble":
            return f"quadratic-bubble(beta={self.beta:g})"
        return self.scheme

    @property
    def rhs_label(self) -> str:
        return self.rhs

    def bubble(self, problem: Problem, mesh: Mesh) -> Optional[BubbleSpec]:
        """The bubble tied to the diffusion rule; None for the central scheme."""
        if self.scheme == "quadratic-bubble":
            return quadratic_bubble(self.beta, mesh.h)
        if self.scheme == "upwind":
            return quadratic_bubble(beta_for_phi(lambda pe: pe, problem.epsilon, mesh.h), mesh.h)
        if self.scheme in ("ias", "exp-bubble"):
            return exponential_bubble(problem.epsilon, mesh.h)
        return None

    def build(self, problem: Problem, mesh: Mesh) -> SchemeConfig:
        bubble = self.bubble(problem, mesh)

        if self.scheme == "central":
            diffusion = DiffusionRule.central()
        elif self.scheme == "upwind":
            diffusion = DiffusionRule.standard_upwind()
        elif self.scheme == "ias":
            diffusion = DiffusionRule.ias_sg()
        else:
            diffusion = DiffusionRule.from_bubble(bubble)

        if self.rhs == "pointwise":
            rhs = RhsRule.pointwise()
        elif bubble is None:
            raise UsageError(f"Scheme {self.scheme!r} has no bubble; use --rhs pointwise")
        elif self.rhs == "oracle":
            rhs = RhsRule.bubble_oracle(bubble, tol=self.oracle_tol)
        else:
            rhs = RhsRule.bubble_quadrature(bubble, RHS_RULES[self.rhs])

        return SchemeConfig(diffusion=diffusion, rhs=rhs)


def parse_variant(
    scheme: str,
    rhs: str,
    beta: Optional[float] = None,
    oracle_tol: float = 1e-12,
) -> SchemeVariant:
    if scheme not in SCHEME_IDS:
        raise UsageError(f"Unknown scheme: {scheme!r} (known: {', '.join(SCHEME_IDS)})")
    if rhs not in RHS_RULES:
        raise UsageError(f"Unknown rhs rule: {rhs!r} (known: {', '.join(RHS_RULES)})")
    if scheme == "quadratic-bubble":
        if beta is None:
            raise UsageError("Scheme 'quadratic-bubble' needs --beta")
        if not beta > 0:
            raise UsageError(f"--beta must be positive, got {beta!r}")
    elif beta is not None:
        raise UsageError(f"--beta only applies to quadratic-bubble, not {scheme!r}")
    return SchemeVariant(scheme=scheme, rhs=rhs, beta=beta, oracle_tol=oracle_tol)


def preset_variant(name: str, oracle_tol: float = 1e-12) -> SchemeVariant:
    try:
        scheme, rhs, beta = PRESETS[name]
    except KeyError:
        raise UsageError(f"Unknown preset: {name!r} (known: {', '.join(PRESETS)})") from None
    return parse_variant(scheme, rhs, beta=beta, oracle_tol=oracle_tol)
