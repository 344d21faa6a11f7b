"""Spatial grid, grid functions, and the competitive order.

Everything downstream works on a fixed 1-D cell-centered grid: midpoint
nodes with equal quadrature weights, so the midpoint rule is exact on
constants and linears and the no-flux operator conserves mass exactly.
Grids and fields are immutable; operations that combine fields insist on
a shared grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Grid",
    "Field",
    "StatePair",
    "GridMismatchError",
    "build_grid",
    "integrate",
    "competitive_leq",
]


class GridMismatchError(ValueError):
    """Two grid functions living on different grids were combined."""


@dataclass(frozen=True)
class Grid:
    """Midpoint discretization of the interval [a, b] with n cells."""

    a: float
    b: float
    n: int
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.n

    def matches(self, other: "Grid") -> bool:
        return (
            self is other
            or (self.n == other.n and self.a == other.a and self.b == other.b)
        )


def build_grid(a: float, b: float, n: int) -> Grid:
    """Uniform cell-centered grid: nodes at a + (i + 1/2)h, all weights h."""
    if not a < b:
        raise ValueError(f"domain endpoints must satisfy a < b, got a={a}, b={b}")
    if n < 3:
        raise ValueError(f"grid needs at least 3 cells, got n={n}")
    h = (b - a) / n
    nodes = a + h * (np.arange(n) + 0.5)
    weights = np.full(n, h)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return Grid(a=float(a), b=float(b), n=int(n), nodes=nodes, weights=weights)


@dataclass(frozen=True)
class Field:
    """A real-valued grid function (one value per node). Entries must be finite."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.n,):
            raise ValueError(
                f"field shape {values.shape} does not match grid size {self.grid.n}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("field contains NaN or inf entries")
        object.__setattr__(self, "values", values)

    @classmethod
    def constant(cls, grid: Grid, value: float) -> "Field":
        return cls(grid, np.full(grid.n, float(value)))

    @classmethod
    def from_function(cls, grid: Grid, fn) -> "Field":
        return cls(grid, np.asarray(fn(grid.nodes), dtype=float))

    def with_values(self, values) -> "Field":
        return Field(self.grid, values)

    def max_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def min(self) -> float:
        return float(np.min(self.values))

    def max(self) -> float:
        return float(np.max(self.values))


def require_same_grid(*fields: Field) -> Grid:
    grid = fields[0].grid
    for f in fields[1:]:
        if not grid.matches(f.grid):
            raise GridMismatchError("fields live on different grids")
    return grid


def integrate(f: Field) -> float:
    """Quadrature of a grid function over the domain."""
    return float(np.dot(f.grid.weights, f.values))


@dataclass(frozen=True)
class StatePair:
    """A pair of grid functions (u, v), one per species."""

    u: Field
    v: Field

    def __post_init__(self):
        require_same_grid(self.u, self.v)

    @property
    def grid(self) -> Grid:
        return self.u.grid

    def is_nonnegative(self) -> bool:
        return bool(self.u.min() >= 0.0 and self.v.min() >= 0.0)

    def is_strictly_positive(self) -> bool:
        return bool(self.u.min() > 0.0 and self.v.min() > 0.0)


def competitive_leq(s1: StatePair, s2: StatePair) -> bool:
    """Competitive order: s1 <= s2 iff u1 <= u2 and v1 >= v2 componentwise.

    This is the order under which the two-species competition flow is
    monotone; order-preservation tests in the dynamics module rely on it.
    """
    require_same_grid(s1.u, s2.u)
    return bool(
        np.all(s1.u.values <= s2.u.values) and np.all(s1.v.values >= s2.v.values)
    )
