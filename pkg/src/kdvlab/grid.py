"""Uniform interior-node grids on [0, L] and the discrete L2/H1 geometry.

Fields store interior values only; the Dirichlet values at x=0 and x=L are
implied zero everywhere in the package.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigurationError, GridMismatchError, SamplingError

MIN_NODES = 8


@dataclass(frozen=True)
class Grid:
    """Uniform mesh with ``n`` interior nodes ``x_i = i*h``, ``h = L/(n+1)``."""

    length: float
    n: int

    def __post_init__(self):
        if not np.isfinite(self.length) or self.length <= 0:
            raise ConfigurationError(f"grid length must be positive, got {self.length!r}")
        if int(self.n) != self.n or self.n < MIN_NODES:
            raise ConfigurationError(f"grid needs n >= {MIN_NODES} interior nodes, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "length", float(self.length))

    @property
    def h(self) -> float:
        return self.length / (self.n + 1)

    @property
    def nodes(self) -> np.ndarray:
        return self.h * np.arange(1, self.n + 1)

    def zeros(self) -> "GridFunction":
        return GridFunction(self, np.zeros(self.n))


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Values of a field at the interior nodes of ``grid``.

    Real in normal use; eigenvectors are stored as complex-valued instances.
    Supports ``+``, ``-`` and scalar multiplication between fields on the
    same grid.
    """

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values)
        if not np.iscomplexobj(values):
            values = values.astype(float)
        if values.shape != (self.grid.n,):
            raise ConfigurationError(
                f"field has shape {values.shape}, grid expects ({self.grid.n},)"
            )
        if not np.all(np.isfinite(values)):
            raise SamplingError("field contains non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def _check(self, other: "GridFunction"):
        if other.grid != self.grid:
            raise GridMismatchError(f"grid mismatch: {self.grid} vs {other.grid}")

    def __add__(self, other):
        self._check(other)
        return GridFunction(self.grid, self.values + other.values)

    def __sub__(self, other):
        self._check(other)
        return GridFunction(self.grid, self.values - other.values)

    def __mul__(self, scalar):
        return GridFunction(self.grid, scalar * self.values)

    __rmul__ = __mul__

    def __neg__(self):
        return GridFunction(self.grid, -self.values)

    def __len__(self):
        return self.grid.n


def make_grid(length: float, n: int) -> Grid:
    return Grid(length, n)


def sample(f: Callable[[np.ndarray], np.ndarray], grid: Grid) -> GridFunction:
    """Evaluate ``f`` (vectorised over numpy arrays) at the interior nodes."""
    values = np.broadcast_to(np.asarray(f(grid.nodes)), (grid.n,)).copy()
    bad = ~np.isfinite(values)
    if bad.any():
        i = int(np.argmax(bad))
        raise SamplingError(f"f is not finite at x={grid.nodes[i]!r}")
    return GridFunction(grid, values)


def _same_grid(u: GridFunction, v: GridFunction):
    if u.grid != v.grid:
        raise GridMismatchError(f"grid mismatch: {u.grid} vs {v.grid}")


def inner_product(u: GridFunction, v: GridFunction) -> float:
    """Trapezoid L2 pairing ``h * sum(u_i v_i)`` (endpoint values are zero)."""
    _same_grid(u, v)
    return u.grid.h * np.dot(u.values, v.values)


def l2_norm(u: GridFunction) -> float:
    return float(np.sqrt(u.grid.h) * np.linalg.norm(u.values))


def h1_seminorm(u: GridFunction) -> float:
    """Forward-difference gradient norm, including both boundary jumps."""
    padded = np.concatenate(([0.0], u.values, [0.0]))
    return float(np.sqrt(u.grid.h) * np.linalg.norm(np.diff(padded)) / u.grid.h)


def h1_norm(u: GridFunction) -> float:
    return float(np.hypot(l2_norm(u), h1_seminorm(u)))
