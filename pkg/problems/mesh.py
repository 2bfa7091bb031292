"""Uniform meshes on [0, 1]."""

from dataclasses import dataclass

import numpy as np

from errors import InvalidArgumentError


@dataclass(frozen=True, eq=False)
class Mesh:
    n: int
    h: float
    nodes: np.ndarray

    @property
    def size(self) -> int:
        """Number of interior unknowns, n - 1."""
        return self.n - 1

    @property
    def interior(self) -> np.ndarray:
        return self.nodes[1:-1]

    def same_as(self, other: "Mesh") -> bool:
        return self.n == other.n

    def __repr__(self) -> str:
        return f"Mesh(n={self.n}, h={self.h!r})"


def make_uniform_mesh(n: int) -> Mesh:
    """Partition [0, 1] into n equal subintervals, x_j = j*h."""
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise InvalidArgumentError(f"Mesh size must be an integer, got {n!r}")
    if n < 2:
        raise InvalidArgumentError(f"Mesh needs at least 2 subintervals, got n={n}")
    n = int(n)
    h = 1.0 / n
    nodes = np.arange(n + 1, dtype=float) * h
    nodes[-1] = 1.0
    nodes.flags.writeable = False
    return Mesh(n=n, h=h, nodes=nodes)
