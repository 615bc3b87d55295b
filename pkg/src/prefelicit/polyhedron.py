"""Ambiguity set over utility increments and its center-based geometry.

The set of increment vectors consistent with the answers so far is a
polyhedron in the reduced space of the first n - 2 increments. It starts
as the probability simplex and shrinks by one homogeneous half-space per
answered comparison. This module computes its analytic center, the
longest axis of the inner ellipsoid induced by the log barrier at that
center, per-breakpoint utility ranges, and the summary radii used to
track elicitation progress.

Cuts are stored as full-length increment-space normals together with the
answer sign; the reduced inequality rows are derived on demand, because
grid refinement changes how the last increment is eliminated.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import LinearProgram, min_eigenpair, solve_lp
from .pwl import BreakpointGrid, g_of_x

_GRAD_TOL = 1e-10
_DUP_TOL = 1e-9


class EmptyInterior(Exception):
    """Raised when the polyhedron has no strictly feasible point."""


@dataclass(frozen=True)
class Polyhedron:
    """Base simplex plus homogeneous answer cuts in reduced coordinates.

    ``cuts`` holds (full-length normal, sign) pairs; a pair (w, h) means
    the inequality h * (lifted v) . w <= 0 on full increment vectors.
    """

    dim: int
    cuts: tuple[tuple[tuple[float, ...], int], ...] = ()

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError("polyhedron dimension must be at least 1")
        for normal, sense in self.cuts:
            if sense not in (-1, 1):
                raise ValueError("cut sense must be +1 or -1")
            if len(normal) != self.dim + 1:
                raise ValueError("cut normal length must be dim + 1")

    @classmethod
    def initial(cls, dim: int) -> "Polyhedron":
        return cls(dim=dim)

    def rows(self) -> tuple[np.ndarray, np.ndarray]:
        """Inequality system a v <= b in the reduced space.

        Base rows keep the increments nonnegative with total at most one;
        each cut contributes the signed normal with the last coordinate
        eliminated through v_last = 1 - sum(v).
        """
        a = [np.ones(self.dim)]
        b = [1.0]
        for j in range(self.dim):
            row = np.zeros(self.dim)
            row[j] = -1.0
            a.append(row)
            b.append(0.0)
        for normal, sense in self.cuts:
            w = np.asarray(normal, dtype=float)
            a.append(sense * (w[:-1] - w[-1]))
            b.append(-sense * w[-1])
        return np.vstack(a), np.asarray(b, dtype=float)

    def add_cut(self, cut_normal: np.ndarray, sense: int) -> "Polyhedron":
        """Append one answered-comparison half-space.

        A zero normal carries no information and is rejected. A cut equal
        to an existing one up to positive scaling (sign included) is
        skipped, since repeating a row only biases the analytic center.
        """
        w = np.asarray(cut_normal, dtype=float)
        if w.shape != (self.dim + 1,):
            raise ValueError("cut normal length must be dim + 1")
        if sense not in (-1, 1):
            raise ValueError("cut sense must be +1 or -1")
        norm = float(np.linalg.norm(w))
        if norm <= 1e-14:
            raise ValueError("degenerate cut: zero normal")
        signed_unit = sense * w / norm
        for normal, h in self.cuts:
            prev = np.asarray(normal, dtype=float)
            prev_unit = h * prev / np.linalg.norm(prev)
            if np.linalg.norm(prev_unit - signed_unit) <= _DUP_TOL:
                return self
        new_cuts = self.cuts + ((tuple(float(t) for t in w), int(sense)),)
        return Polyhedron(dim=self.dim, cuts=new_cuts)

    def contains(self, v: np.ndarray, tol: float = 1e-9) -> bool:
        a, b = self.rows()
        return bool(np.all(a @ np.asarray(v, dtype=float) <= b + tol))

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "cuts": [{"normal": list(normal), "sense": sense}
                     for normal, sense in self.cuts],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Polyhedron":
        cuts = tuple((tuple(float(t) for t in c["normal"]), int(c["sense"]))
                     for c in data.get("cuts", []))
        return cls(dim=int(data["dim"]), cuts=cuts)


@dataclass(frozen=True)
class AnalyticCenter:
    """Barrier maximizer with its slacks against every row."""

    c: np.ndarray
    slacks: np.ndarray

    @property
    def lifted(self) -> np.ndarray:
        return np.append(self.c, 1.0 - self.c.sum())


@dataclass(frozen=True)
class SonnevendAxis:
    """Longest inner-ellipsoid axis through the center, hitting the boundary."""

    h: np.ndarray
    v1: np.ndarray
    v2: np.ndarray


def _strictly_feasible_start(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Largest-inscribed-ball point, or EmptyInterior if none has room."""
    m, n = a.shape
    norms = np.linalg.norm(a, axis=1)
    lp = LinearProgram(
        objective=np.append(np.zeros(n), 1.0),
        maximize=True,
        a_ub=np.hstack([a, norms[:, None]]),
        b_ub=b,
        lower=np.full(n + 1, -np.inf),
        upper=np.append(np.full(n, np.inf), 1.0),
    )
    res = solve_lp(lp)
    if res.status != "optimal" or res.x is None or res.x[-1] <= 1e-12:
        raise EmptyInterior("no strictly feasible point in the polyhedron")
    return res.x[:n]


def analytic_center(p: Polyhedron) -> AnalyticCenter:
    """Maximizer of the sum of log slacks, by damped Newton iterations.

    Rows are normalized to unit length first; that shifts the objective
    by a constant and leaves the maximizer unchanged while keeping the
    Hessian well scaled. Iterations stop when the gradient norm of the
    normalized problem drops to 1e-10.
    """
    a_raw, b_raw = p.rows()
    norms = np.linalg.norm(a_raw, axis=1)
    a = a_raw / norms[:, None]
    b = b_raw / norms
    v = _strictly_feasible_start(a, b)

    for _ in range(500):
        s = b - a @ v
        grad = a.T @ (1.0 / s)
        if np.linalg.norm(grad) <= _GRAD_TOL:
            break
        h = (a / (s ** 2)[:, None]).T @ a
        try:
            step = np.linalg.solve(h, -grad)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(h, -grad, rcond=None)[0]
        t = 1.0
        phi = -np.sum(np.log(s))
        descent = grad @ step
        while t > 1e-18:
            cand = v + t * step
            s_cand = b - a @ cand
            if np.all(s_cand > 0):
                if -np.sum(np.log(s_cand)) <= phi + 0.25 * t * descent:
                    break
            t *= 0.5
        if t <= 1e-18:
            break
        v = v + t * step

    s_raw = b_raw - a_raw @ v
    if not np.all(s_raw > 0):
        raise EmptyInterior("center search left the interior")
    return AnalyticCenter(c=v, slacks=s_raw)


def longest_axis_endpoints(p: Polyhedron, ac: AnalyticCenter) -> SonnevendAxis:
    """Boundary points along the flattest direction of the barrier Hessian.

    The inner ellipsoid at the center has axes along the Hessian's
    eigenvectors with lengths shrinking as eigenvalues grow, so the
    longest axis follows the smallest eigenvector. Both rays from the
    center along that direction are extended until a row goes tight.
    """
    a, b = p.rows()
    s = b - a @ ac.c
    h = (a / (s ** 2)[:, None]).T @ a
    _, u = min_eigenpair(h)

    def reach(direction: np.ndarray) -> float:
        along = a @ direction
        with np.errstate(divide="ignore"):
            ratios = np.where(along > 1e-14, s / along, np.inf)
        return float(np.min(ratios))

    t_plus = reach(u)
    t_minus = reach(-u)
    return SonnevendAxis(h=h, v1=ac.c + t_plus * u, v2=ac.c - t_minus * u)


def _band_objective(grid: BreakpointGrid, x: float) -> tuple[np.ndarray, float]:
    """Reduced-space linear form of the utility value at x plus its offset."""
    g = g_of_x(grid, x)
    return g[:-1] - g[-1], float(g[-1])


def utility_band(p: Polyhedron, grid: BreakpointGrid) -> list[tuple[float, float]]:
    """Per-breakpoint range of achievable utility values.

    Each interior breakpoint takes two linear programs over the
    polyhedron; the range endpoints are pinned at 0 and 1 by the
    normalization and returned exactly.
    """
    if grid.n - 2 != p.dim:
        raise ValueError("grid size does not match polyhedron dimension")
    a, b = p.rows()
    out: list[tuple[float, float]] = []
    for i, x in enumerate(grid.points):
        if i == 0:
            out.append((0.0, 0.0))
            continue
        if i == grid.n - 1:
            out.append((1.0, 1.0))
            continue
        obj, offset = _band_objective(grid, float(x))
        bounds: list[float] = []
        for maximize in (False, True):
            res = solve_lp(LinearProgram(objective=obj, maximize=maximize,
                                         a_ub=a, b_ub=b,
                                         lower=np.full(p.dim, -np.inf)))
            if res.status != "optimal":
                raise RuntimeError(f"band subproblem came back {res.status}")
            bounds.append(res.value + offset)
        out.append((bounds[0], bounds[1]))
    return out


def value_range(p: Polyhedron, grid: BreakpointGrid, x: float) -> tuple[float, float]:
    """Range of achievable utility values at one amount, on or off grid.

    The amount does not need to be a breakpoint; the range endpoints at
    the domain ends are pinned by the normalization.
    """
    if grid.n - 2 != p.dim:
        raise ValueError("grid size does not match polyhedron dimension")
    if x <= grid.lo + 1e-15:
        grid._check_range(x)
        return 0.0, 0.0
    if x >= grid.hi - 1e-15:
        grid._check_range(x)
        return 1.0, 1.0
    a, b = p.rows()
    obj, offset = _band_objective(grid, float(x))
    bounds: list[float] = []
    for maximize in (False, True):
        res = solve_lp(LinearProgram(objective=obj, maximize=maximize,
                                     a_ub=a, b_ub=b,
                                     lower=np.full(p.dim, -np.inf)))
        if res.status != "optimal":
            raise RuntimeError(f"range subproblem came back {res.status}")
        bounds.append(res.value + offset)
    return bounds[0], bounds[1]


def radius_metrics(p: Polyhedron, grid: BreakpointGrid,
                   v_star: np.ndarray | None = None,
                   include_band: bool = True) -> dict[str, float | None]:
    """Progress radii: center error, axis length, and band width.

    ``d_ac`` compares running sums of the center's increments against the
    reference increments and is only available in simulation runs where
    the reference is known. ``d_r1`` is the sup-norm length of the
    current longest axis. ``d_r2`` is the widest per-breakpoint utility
    range; it costs two linear programs per breakpoint and can be
    skipped.
    """
    ac = analytic_center(p)
    axis = longest_axis_endpoints(p, ac)
    d_r1 = float(np.max(np.abs(axis.v1 - axis.v2)))
    d_ac: float | None = None
    if v_star is not None:
        ref = np.asarray(v_star, dtype=float)[:p.dim]
        d_ac = float(np.max(np.abs(np.cumsum(ac.c) - np.cumsum(ref))))
    d_r2: float | None = None
    if include_band:
        band = utility_band(p, grid)
        d_r2 = float(max(hi - lo for lo, hi in band))
    return {"d_ac": d_ac, "d_r1": d_r1, "d_r2": d_r2}
