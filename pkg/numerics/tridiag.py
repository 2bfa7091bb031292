"""Tridiagonal systems: storage, matrix-vector product, and the Thomas solve.

Row i of the matrix reads

    lower[i-1] * x[i-1] + main[i] * x[i] + upper[i] * x[i+1]

with lower and upper one entry shorter than main.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from loguru import logger

from errors import InvalidArgumentError, SingularSystemError


@dataclass(frozen=True, eq=False)
class TridiagonalSystem:
    lower: np.ndarray
    main: np.ndarray
    upper: np.ndarray

    def __post_init__(self) -> None:
        main = np.array(self.main, dtype=float)
        lower = np.array(self.lower, dtype=float)
        upper = np.array(self.upper, dtype=float)
        m = main.shape[0] if main.ndim == 1 else 0
        if m < 1 or lower.shape != (m - 1,) or upper.shape != (m - 1,):
            raise InvalidArgumentError(
                f"Inconsistent diagonals: main {main.shape}, lower {lower.shape}, upper {upper.shape}"
            )
        for name, arr in (("lower", lower), ("main", main), ("upper", upper)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def size(self) -> int:
        return self.main.shape[0]

    @classmethod
    def constant(cls, m: int, lower: float, main: float, upper: float) -> "TridiagonalSystem":
        """tridiag(lower, main, upper) of size m."""
        if m < 1:
            raise InvalidArgumentError(f"System size must be positive, got {m}")
        return cls(
            lower=np.full(m - 1, lower, dtype=float),
            main=np.full(m, main, dtype=float),
            upper=np.full(m - 1, upper, dtype=float),
        )

    def to_dense(self) -> np.ndarray:
        return np.diag(self.main) + np.diag(self.lower, -1) + np.diag(self.upper, 1)

    def scaled(self, factor: float) -> "TridiagonalSystem":
        return TridiagonalSystem(self.lower * factor, self.main * factor, self.upper * factor)

    def __add__(self, other: "TridiagonalSystem") -> "TridiagonalSystem":
        if other.size != self.size:
            raise InvalidArgumentError(f"Cannot add systems of size {self.size} and {other.size}")
        return TridiagonalSystem(
            self.lower + other.lower,
            self.main + other.main,
            self.upper + other.upper,
        )


def apply(system: TridiagonalSystem, v) -> np.ndarray:
    """Matrix-vector product."""
    v = np.asarray(v, dtype=float)
    if v.shape != (system.size,):
        raise InvalidArgumentError(f"Vector of shape {v.shape} does not match system size {system.size}")
    out = system.main * v
    out[1:] += system.lower * v[:-1]
    out[:-1] += system.upper * v[1:]
    return out


def solve(
    system: TridiagonalSystem,
    rhs,
    pivot_threshold: float = 1e-300,
    residual_rtol: Optional[float] = None,
) -> np.ndarray:
    """Thomas forward elimination and back substitution, no pivoting.

    Every matrix this lab assembles is irreducibly diagonally dominant, so
    the pivots stay away from zero; one below pivot_threshold in magnitude
    raises SingularSystemError. With residual_rtol set, a relative residual
    above it is logged.
    """
    d = np.array(rhs, dtype=float)
    m = system.size
    if d.shape != (m,):
        raise InvalidArgumentError(f"Right-hand side of shape {d.shape} does not match system size {m}")

    a, c = system.lower, system.upper
    b = system.main.copy()

    if abs(b[0]) < pivot_threshold:
        raise SingularSystemError(f"Zero pivot in row 0 (|pivot| = {abs(b[0]):.3e})")
    for k in range(1, m):
        factor = a[k - 1] / b[k - 1]
        b[k] -= factor * c[k - 1]
        d[k] -= factor * d[k - 1]
        if abs(b[k]) < pivot_threshold:
            raise SingularSystemError(f"Zero pivot in row {k} (|pivot| = {abs(b[k]):.3e})")

    x = np.empty(m)
    x[-1] = d[-1] / b[-1]
    for k in range(m - 2, -1, -1):
        x[k] = (d[k] - c[k] * x[k + 1]) / b[k]

    if residual_rtol is not None:
        rhs = np.asarray(rhs, dtype=float)
        scale = np.max(np.abs(rhs))
        if scale > 0:
            residual = np.max(np.abs(apply(system, x) - rhs)) / scale
            if residual > residual_rtol:
                logger.warning(f"Thomas solve residual {residual:.3e} exceeds {residual_rtol:.1e} (m={m})")
    return x
