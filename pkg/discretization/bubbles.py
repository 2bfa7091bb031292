"""Bubble generating functions B on [0, h] and the Peclet coefficients.

A bubble vanishes at both ends of [0, h] and has a positive integral
b1*h. Translates B_i(x) = B(x - x_{i-1}) are never built as global
functions: callers shift their argument into [0, h] and evaluate B.

Exponential quantities are evaluated with strictly negative exponents
only. e^{h/eps} overflows for convection-dominated meshes, while
e^{-h/eps} underflows to zero harmlessly.
"""

from dataclasses import dataclass
from typing import Callable, Literal, Optional, Union

import numpy as np

from errors import InvalidArgumentError

BubbleKind = Literal["quadratic", "exponential"]

# Slack for abscissae produced by affine maps that land an ulp outside [0, h]
_ENDPOINT_SLACK = 1e-14

# Below this h/eps the direct exponential forms cancel; power series take over
_SERIES_RATIO = 0.5
_SERIES_TERMS = 18


@dataclass(frozen=True)
class PecletCoefficients:
    pe: float       # local Peclet number h / (2 eps)
    g0: float       # tanh(pe)
    l_d: float      # (1 + g0) / 2
    u_d: float      # (1 - g0) / 2
    l0: float       # l_d / g0
    u0: float       # u_d / g0


def _require_positive(**values: float) -> None:
    for name, value in values.items():
        if not value > 0:
            raise InvalidArgumentError(f"{name} must be positive, got {value!r}")


def peclet_coefficients(epsilon: float, h: float) -> PecletCoefficients:
    """Coefficients of the exponential bubble, in the underflow-safe rational form.

    With q = e^{-h/eps}:  g0 = (1 - q)/(1 + q),  l_d = (1 + g0)/2,  u_d = (1 - g0)/2.
    Once q drops below half a unit roundoff (h/eps >= 40) g0 rounds to 1 and
    l_d = 1, u_d = 0 hold exactly.
    """
    _require_positive(epsilon=epsilon, h=h)
    ratio = h / epsilon
    q = np.exp(-ratio)
    g0 = float(-np.expm1(-ratio) / (1.0 + q))
    l_d = (1.0 + g0) / 2.0
    u_d = (1.0 - g0) / 2.0
    return PecletCoefficients(
        pe=ratio / 2.0,
        g0=g0,
        l_d=l_d,
        u_d=u_d,
        l0=l_d / g0,
        u0=u_d / g0,
    )


@dataclass(frozen=True)
class BubbleSpec:
    kind: BubbleKind
    h: float
    b1: float                     # (1/h) int_0^h B
    midpoint: float               # B(h/2)
    sup_norm: float               # M = sup |B|
    beta: Optional[float] = None  # quadratic kind
    epsilon: Optional[float] = None
    peclet: Optional[PecletCoefficients] = None

    @property
    def integral(self) -> float:
        """int_0^h B."""
        return self.b1 * self.h

    def __call__(self, x):
        return evaluate_bubble(self, x)

    def label(self) -> str:
        if self.kind == "quadratic":
            return f"quadratic(beta={self.beta:g})"
        return "exponential"


def quadratic_bubble(beta: float, h: float) -> BubbleSpec:
    """B(x) = (4 beta / h^2) x (h - x); b1 = 2 beta / 3, B(h/2) = beta."""
    _require_positive(beta=beta, h=h)
    return BubbleSpec(
        kind="quadratic",
        h=h,
        b1=2.0 * beta / 3.0,
        midpoint=beta,
        sup_norm=beta,
        beta=beta,
    )


def _mean_slope(ratio: float) -> float:
    """(1 - e^{-r}) / r, accurate for every r > 0."""
    return float(-np.expm1(-ratio) / ratio)


def _exponential_profile(t: np.ndarray, ratio: float, l0: float) -> np.ndarray:
    """B(t h) for t in [0, 1], with r = h/eps.

    Direct form l0 (1 - e^{-r t}) - t for r >= _SERIES_RATIO. Below that the
    two terms agree to O(r) and B = t (E(r t) - E(r)) / E(r), E(z) = (1 - e^{-z})/z,
    is summed term by term.
    """
    t = np.asarray(t, dtype=float)
    if ratio >= _SERIES_RATIO:
        return l0 * -np.expm1(-ratio * t) - t

    total = np.zeros_like(t)
    power, factorial = 1.0, 1.0
    for k in range(1, _SERIES_TERMS + 1):
        power *= ratio
        factorial *= k + 1
        total += (-1) ** (k + 1) * power * (1.0 - t**k) / factorial
    return t * total / _mean_slope(ratio)


def exponential_bubble_mean(ratio: float) -> float:
    """b1 = (1/h) int_0^h B = coth(r/2)/2 - 1/r for the exponential bubble, r = h/eps.

    Strictly positive for every r > 0; behaves like r/12 as r -> 0.
    """
    _require_positive(ratio=ratio)
    if ratio >= _SERIES_RATIO:
        g0 = float(-np.expm1(-ratio) / (1.0 + np.exp(-ratio)))
        return 1.0 / (2.0 * g0) - 1.0 / ratio

    # int_0^1 t (1 - t^k) dt = k / (2 (k + 2))
    total = 0.0
    power, factorial = 1.0, 1.0
    for k in range(1, _SERIES_TERMS + 1):
        power *= ratio
        factorial *= k + 1
        total += (-1) ** (k + 1) * power * k / (2.0 * (k + 2) * factorial)
    return total / _mean_slope(ratio)


def exponential_bubble(epsilon: float, h: float) -> BubbleSpec:
    """Solution of -eps B'' - B' = 1/h, B(0) = B(h) = 0.

    B(x) = l0 (1 - e^{-x/eps}) - x/h, with int_0^h B = h/(2 g0) - eps, so
    eps + b1*h = h/(2 g0). B(h/2) simplifies to tanh(h/(4 eps)) / 2.
    """
    coeffs = peclet_coefficients(epsilon, h)
    ratio = h / epsilon

    # B is concave; its maximiser solves l0 e^{-x/eps} / eps = 1/h
    peak = float(np.clip(-np.log(_mean_slope(ratio)) / ratio, 0.0, 1.0))
    sup_norm = float(_exponential_profile(peak, ratio, coeffs.l0))

    return BubbleSpec(
        kind="exponential",
        h=h,
        b1=exponential_bubble_mean(ratio),
        midpoint=0.5 * float(np.tanh(ratio / 4.0)),
        sup_norm=abs(sup_norm),
        epsilon=epsilon,
        peclet=coeffs,
    )


def evaluate_bubble(spec: BubbleSpec, x: Union[float, np.ndarray]):
    """B(x) for x in [0, h]; returns exactly 0 at both endpoints."""
    arr = np.asarray(x, dtype=float)
    slack = _ENDPOINT_SLACK * spec.h
    if np.any(arr < -slack) or np.any(arr > spec.h + slack):
        raise InvalidArgumentError(f"Bubble argument outside [0, {spec.h!r}]: {x!r}")
    arr = np.clip(arr, 0.0, spec.h)

    if spec.kind == "quadratic":
        values = (4.0 * spec.beta / spec.h**2) * arr * (spec.h - arr)
    else:
        ratio = spec.h / spec.epsilon
        values = _exponential_profile(arr / spec.h, ratio, spec.peclet.l0)
        values = np.where((arr == 0.0) | (arr == spec.h), 0.0, values)

    if np.ndim(values) == 0:
        return float(values)
    return values


def beta_for_phi(phi: Callable[[float], float], epsilon: float, h: float) -> float:
    """Quadratic-bubble parameter reproducing eps_h = eps (1 + phi(Pe)).

    beta = (3/4) phi(Pe) / Pe, so that eps + (2 beta / 3) h = eps (1 + phi(Pe)).
    """
    _require_positive(epsilon=epsilon, h=h)
    pe = h / (2.0 * epsilon)
    value = phi(pe)
    if not value > 0:
        raise InvalidArgumentError(f"phi(Pe={pe:g}) must be positive to define a bubble, got {value!r}")
    return 0.75 * value / pe
