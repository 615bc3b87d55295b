"""Piecewise-linear utilities described by increments between breakpoints.

A utility on [lo, hi] is pinned to 0 at lo and 1 at hi and interpolated
linearly between grid breakpoints. Its shape is carried entirely by the
vector of increments between consecutive breakpoints, which lives on the
probability simplex. The feature map ``g_of_x`` turns evaluation into a
dot product with that increment vector, and ``pq_encoding`` provides the
matrices that express the same map through interval-selection variables
for use inside mixed-integer models.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class BreakpointGrid:
    """Strictly increasing breakpoints spanning the outcome range.

    ``rounding_decimals`` is the policy applied to points added later via
    ``with_point``; the original points are kept exactly as given.
    """

    points: tuple[float, ...]
    rounding_decimals: int = 2

    def __post_init__(self) -> None:
        if len(self.points) < 3:
            raise ValueError("grid needs at least three breakpoints")
        arr = np.asarray(self.points, dtype=float)
        if not np.all(np.diff(arr) > 0):
            raise ValueError("breakpoints must be strictly increasing")

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def lo(self) -> float:
        return self.points[0]

    @property
    def hi(self) -> float:
        return self.points[-1]

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=float)

    @property
    def deltas(self) -> np.ndarray:
        """Interval widths, length n - 1."""
        return np.diff(self.array)

    def _check_range(self, x: float) -> None:
        if not (self.lo - 1e-12 <= x <= self.hi + 1e-12):
            raise ValueError(f"value {x} outside range [{self.lo}, {self.hi}]")

    def interval_of(self, x: float) -> int:
        """Index k of the interval (points[k], points[k+1]] containing x.

        The left endpoint of the range belongs to interval 0 with
        fractional progress 0; every breakpoint above it belongs to the
        interval ending there, so the map is single-valued.
        """
        self._check_range(x)
        if x <= self.points[0]:
            return 0
        k = int(np.searchsorted(self.array, x, side="left")) - 1
        return min(max(k, 0), self.n - 2)

    def with_point(self, t: float, dedup_tol: float = 0.0) -> "BreakpointGrid":
        """Return a grid with t inserted, rounded per the grid policy.

        The rounded value is skipped when it falls within ``dedup_tol``
        of an existing breakpoint (or at the range endpoints), keeping
        grids from accumulating near-duplicate points.
        """
        self._check_range(t)
        r = round(float(t), self.rounding_decimals)
        r = min(max(r, self.lo), self.hi)
        arr = self.array
        if np.min(np.abs(arr - r)) <= max(dedup_tol, 1e-12):
            return self
        merged = tuple(sorted(list(self.points) + [r]))
        return BreakpointGrid(points=merged, rounding_decimals=self.rounding_decimals)

    def to_json(self) -> str:
        return json.dumps(list(self.points))

    @classmethod
    def from_json(cls, text: str, rounding_decimals: int = 2) -> "BreakpointGrid":
        return cls(points=tuple(float(t) for t in json.loads(text)),
                   rounding_decimals=rounding_decimals)


@dataclass(frozen=True)
class IncrementVector:
    """Utility increments with the last component left implicit.

    ``free`` holds the first n - 2 increments; the final one is pinned to
    1 minus their sum so the full vector always totals exactly one.
    """

    free: tuple[float, ...]

    @classmethod
    def from_free(cls, v: np.ndarray) -> "IncrementVector":
        return cls(free=tuple(float(t) for t in np.asarray(v, dtype=float)))

    @classmethod
    def from_lifted(cls, full: np.ndarray, tol: float = 1e-8) -> "IncrementVector":
        full = np.asarray(full, dtype=float)
        total = float(full.sum())
        if abs(total - 1.0) > tol:
            raise ValueError(f"lifted increments must sum to 1, got {total}")
        return cls.from_free(full[:-1])

    @property
    def lifted(self) -> np.ndarray:
        v = np.asarray(self.free, dtype=float)
        return np.append(v, 1.0 - v.sum())

    def is_admissible(self, tol: float = 1e-9) -> bool:
        return bool(np.all(self.lifted >= -tol))

    def to_json(self) -> str:
        return json.dumps([float(t) for t in self.lifted])

    @classmethod
    def from_json(cls, text: str) -> "IncrementVector":
        return cls.from_lifted(np.asarray(json.loads(text), dtype=float))


def lift(v: np.ndarray) -> np.ndarray:
    """Append the implicit last increment 1 - sum(v)."""
    v = np.asarray(v, dtype=float)
    return np.append(v, 1.0 - v.sum())


def g_of_x(grid: BreakpointGrid, x: float) -> np.ndarray:
    """Feature vector of x: full intervals at 1, the active one fractional.

    For x in (points[k], points[k+1]] the first k coordinates are 1, the
    k-th is the progress through the active interval, and the rest are 0.
    The left endpoint maps to the zero vector and the right endpoint to
    all ones, so utilities built on top run from 0 to 1.
    """
    grid._check_range(x)
    g = np.zeros(grid.n - 1)
    if x <= grid.points[0]:
        return g
    k = grid.interval_of(x)
    g[:k] = 1.0
    g[k] = (x - grid.points[k]) / (grid.points[k + 1] - grid.points[k])
    return g


@dataclass(frozen=True)
class PqEncoding:
    """Matrices recovering g(x) from interval-selection variables.

    With z the one-hot interval selector and y = x * z, the identity
    g(x) = P y + Q z holds: P scales the active coordinate by the
    interval width, Q subtracts the interval's left endpoint and adds 1
    for every interval strictly above the active one.
    """

    grid: BreakpointGrid

    @property
    def p_matrix(self) -> np.ndarray:
        return np.diag(1.0 / self.grid.deltas)

    @property
    def q_matrix(self) -> np.ndarray:
        m = self.grid.n - 1
        q = np.triu(np.ones((m, m)), k=1)
        np.fill_diagonal(q, -self.grid.array[:-1] / self.grid.deltas)
        return q


def pq_encode(grid: BreakpointGrid, x: float) -> tuple[np.ndarray, np.ndarray]:
    """Selection variables (y, z) for x: one-hot z, y = x on the active slot."""
    grid._check_range(x)
    k = grid.interval_of(x)
    m = grid.n - 1
    z = np.zeros(m)
    z[k] = 1.0
    y = np.zeros(m)
    y[k] = float(np.clip(x, grid.lo, grid.hi))
    return y, z


def eval_utility(grid: BreakpointGrid, v: IncrementVector, x: float) -> float:
    """Utility value at x for the given increments; 0 at lo, 1 at hi."""
    return float(v.lifted @ g_of_x(grid, x))


def true_increments(u_star: Callable[[float], float], grid: BreakpointGrid) -> IncrementVector:
    """Normalized increments of a reference utility across the grid.

    Divides each between-breakpoint gain by the total gain over the
    range, so the result sums to one. A flat reference utility has no
    meaningful increments and is rejected.
    """
    vals = np.array([u_star(float(x)) for x in grid.points])
    span = vals[-1] - vals[0]
    if abs(span) < 1e-15:
        raise ValueError("reference utility is flat over the range")
    return IncrementVector.from_lifted(np.diff(vals) / span, tol=1e-6)
