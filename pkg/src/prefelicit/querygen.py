"""Construction of comparison queries that cut through the center.

A query offers the responder a choice between a binary lottery A, paying
r1 with probability 1 - p and r3 with probability p, and a sure amount
B = r2. Both sides are built to have the same expected utility D under
the center's increments, so either answer slices the ambiguity set
through its analytic center. The sure side is pinned down uniquely by
the budget; the lottery side maximizes the expected utility seen by one
end of the longest axis, which makes the resulting cut face that axis.

The lottery solve works in the space of achievable feature vectors. For
a fixed pair of intervals holding r1 and r3, the feature vector of the
lottery is linear in (a1, a3, p) with a1 = (1 - p) t1 and a3 = p t3,
where t1, t3 are the within-interval positions. Each pair is therefore a
three-variable linear program solved exactly by enumerating its facet
vertices in closed form; pairs are swept in lexicographic order.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .polyhedron import Polyhedron, analytic_center, longest_axis_endpoints
from .pwl import BreakpointGrid, g_of_x, lift

logger = logging.getLogger(__name__)

DEFAULT_D_GRID: tuple[float, ...] = tuple(s / 10 for s in range(1, 11))
DEFAULT_P_BOUNDS: tuple[float, float] = (0.05, 0.95)

_TIE_TOL = 1e-9
_FEAS_TOL = 1e-9
_ZERO_CUT_TOL = 1e-12


class AllDegenerate(Exception):
    """Every candidate budget level produced an uninformative query."""


@dataclass(frozen=True)
class QueryParams:
    """One lottery-versus-sure-amount comparison.

    A pays r1 with probability 1 - p and r3 with probability p; B pays
    r2 for sure. D is the common expected utility of both sides under
    the center increments at generation time.
    """

    r1: float
    r2: float
    r3: float
    p: float
    D: float

    def __post_init__(self) -> None:
        if not (self.r1 <= self.r2 + 1e-9 and self.r2 <= self.r3 + 1e-9):
            raise ValueError(f"query amounts out of order: {self.r1}, {self.r2}, {self.r3}")
        if not (0.0 < self.p < 1.0):
            raise ValueError(f"mixing probability must be inside (0, 1), got {self.p}")


@dataclass(frozen=True)
class CutVector:
    """Feature-space difference between the lottery and the sure side."""

    lifted: tuple[float, ...]

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.lifted, dtype=float)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.array))


def _validated_weights(c_lifted: np.ndarray, grid: BreakpointGrid,
                       strict: bool) -> np.ndarray:
    c = np.asarray(c_lifted, dtype=float)
    if c.shape != (grid.n - 1,):
        raise ValueError("weight vector length must match the interval count")
    if abs(float(c.sum()) - 1.0) > 1e-6:
        raise ValueError("weights must sum to 1")
    if strict and np.any(c <= 0):
        raise ValueError("center increments must be strictly positive")
    if not strict and np.any(c < -1e-9):
        raise ValueError("increments must be nonnegative")
    return c


def _locate_budget(c: np.ndarray, d: float) -> tuple[int, float]:
    """Interval index and fractional fill of the budget staircase."""
    cum = np.cumsum(c)
    k = int(np.searchsorted(cum, d, side="right"))
    if k >= c.size:
        return c.size - 1, 1.0
    prev = float(cum[k - 1]) if k > 0 else 0.0
    t = (d - prev) / float(c[k])
    return k, float(np.clip(t, 0.0, 1.0))


def budget_point(c_lifted: np.ndarray, grid: BreakpointGrid, d: float) -> np.ndarray:
    """The unique feature staircase whose center-weighted sum equals d.

    Full intervals are taken greedily from the left; the remaining
    budget fixes the fractional fill of one interval, so the point is
    unique for strictly positive center increments.
    """
    c = _validated_weights(c_lifted, grid, strict=True)
    if not (0.0 < d <= 1.0):
        raise ValueError(f"budget must lie in (0, 1], got {d}")
    k, t = _locate_budget(c, d)
    out = np.zeros(grid.n - 1)
    out[:k] = 1.0
    out[k] = t
    return out


def solve_B(v1_lifted: np.ndarray, c_lifted: np.ndarray,
            grid: BreakpointGrid, d: float) -> float:
    """Sure amount whose feature vector is the budget staircase.

    Because admissible increment vectors are nonnegative, the utility
    any of them assigns to a sure amount grows with the amount, and so
    does the center-weighted budget; the best amount within budget is
    therefore the one hitting the budget exactly, independent of the
    axis endpoint passed in. The endpoint is accepted for signature
    symmetry with the lottery solve.
    """
    del v1_lifted
    c = _validated_weights(c_lifted, grid, strict=True)
    if not (0.0 < d <= 1.0):
        raise ValueError(f"budget must lie in (0, 1], got {d}")
    k, t = _locate_budget(c, d)
    return float(grid.points[k] + t * (grid.points[k + 1] - grid.points[k]))


def _pair_arrays(w: np.ndarray, nu: np.ndarray, d: float,
                 cw: np.ndarray, cn: np.ndarray):
    """Coefficient arrays of the per-pair lottery programs.

    For interval pair (k1 < k3) the budget reads
    alpha a1 + beta a3 + gamma p = d - cw[k1]
    and the objective oa a1 + ob a3 + op p + cn[k1].
    """
    m = w.size
    k1, k3 = np.triu_indices(m, k=1)
    keep = cw[k1] <= d + 1e-12
    k1, k3 = k1[keep], k3[keep]
    alpha = w[k1]
    beta = w[k3]
    gamma = w[k1] + (cw[k3] - cw[k1 + 1])
    rhs = d - cw[k1]
    oa = nu[k1]
    ob = nu[k3]
    op = nu[k1] + (cn[k3] - cn[k1 + 1])
    base = cn[k1]
    return k1, k3, alpha, beta, gamma, rhs, oa, ob, op, base


def _facet_vertices(alpha, beta, gamma, rhs, p_lo: float, p_hi: float):
    """Closed-form candidate vertices of each pair program, fixed order.

    Two of the six facets a1 = 0, a1 = 1 - p, a3 = 0, a3 = p, p = p_lo,
    p = p_hi are pinned per candidate and the budget equality supplies
    the third equation. The three inconsistent facet pairs are omitted.
    """
    one = np.ones_like(rhs)
    with np.errstate(divide="ignore", invalid="ignore"):
        candidates = []
        p = rhs / gamma
        candidates.append((p, np.zeros_like(p), np.zeros_like(p)))
        p = rhs / (beta + gamma)
        candidates.append((p, np.zeros_like(p), p))
        for p_fix in (p_lo, p_hi):
            p = p_fix * one
            candidates.append((p, np.zeros_like(p), (rhs - gamma * p_fix) / beta))
        p = (rhs - alpha) / (gamma - alpha)
        candidates.append((p, 1.0 - p, np.zeros_like(p)))
        p = (rhs - alpha) / (beta + gamma - alpha)
        candidates.append((p, 1.0 - p, p))
        for p_fix in (p_lo, p_hi):
            p = p_fix * one
            a1 = (1.0 - p_fix) * one
            candidates.append((p, a1, (rhs - alpha * a1 - gamma * p_fix) / beta))
        for p_fix in (p_lo, p_hi):
            p = p_fix * one
            candidates.append((p, (rhs - gamma * p_fix) / alpha, np.zeros_like(p)))
        for p_fix in (p_lo, p_hi):
            p = p_fix * one
            a3 = p_fix * one
            candidates.append((p, (rhs - (beta + gamma) * p_fix) / alpha, a3))
    return candidates


def solve_A(v2_lifted: np.ndarray, c_lifted: np.ndarray, grid: BreakpointGrid,
            d: float, p_bounds: tuple[float, float] = DEFAULT_P_BOUNDS,
            ) -> tuple[float, float, float]:
    """Lottery parameters (r1, r3, p) maximizing one axis endpoint's view.

    Maximizes the endpoint-weighted value of the lottery features over
    all pairs subject to the center-weighted value equaling the budget.
    If the budget staircase itself attains the optimum, the comparison
    cannot distinguish anything on this grid, and the degenerate triple
    r1 = r3 = sure amount is returned so the caller can drop it. Among
    informative ties the lexicographically smallest interval pair wins,
    and within a pair the first optimal facet vertex in the fixed
    enumeration order.
    """
    w = _validated_weights(c_lifted, grid, strict=True)
    nu = _validated_weights(v2_lifted, grid, strict=False)
    if not (0.0 < d <= 1.0):
        raise ValueError(f"budget must lie in (0, 1], got {d}")
    p_lo, p_hi = float(p_bounds[0]), float(p_bounds[1])
    if not (0.0 < p_lo <= p_hi < 1.0):
        raise ValueError(f"probability bounds must satisfy 0 < lo <= hi < 1, got {p_bounds}")

    points = grid.array
    cw = np.concatenate([[0.0], np.cumsum(w)])
    cn = np.concatenate([[0.0], np.cumsum(nu)])
    k_d, t_d = _locate_budget(w, d)
    diag_value = float(cn[k_d] + nu[k_d] * t_d)

    k1, k3, alpha, beta, gamma, rhs, oa, ob, op, base = _pair_arrays(w, nu, d, cw, cn)
    n_pairs = k1.size
    best_val = np.full(n_pairs, -np.inf)
    best_p = np.zeros(n_pairs)
    best_a1 = np.zeros(n_pairs)
    best_a3 = np.zeros(n_pairs)
    for p, a1, a3 in _facet_vertices(alpha, beta, gamma, rhs, p_lo, p_hi):
        feasible = (
            np.isfinite(p) & np.isfinite(a1) & np.isfinite(a3)
            & (p >= p_lo - _FEAS_TOL) & (p <= p_hi + _FEAS_TOL)
            & (a1 >= -_FEAS_TOL) & (a1 <= 1.0 - p + _FEAS_TOL)
            & (a3 >= -_FEAS_TOL) & (a3 <= p + _FEAS_TOL)
        )
        with np.errstate(invalid="ignore"):
            val = np.where(feasible, oa * a1 + ob * a3 + op * p, -np.inf)
        improve = val > best_val + _TIE_TOL
        best_val = np.where(improve, val, best_val)
        best_p = np.where(improve, p, best_p)
        best_a1 = np.where(improve, a1, best_a1)
        best_a3 = np.where(improve, a3, best_a3)
    pair_vals = best_val + base

    top = float(np.max(pair_vals)) if n_pairs else -np.inf
    if diag_value >= top - _TIE_TOL:
        r = float(points[k_d] + t_d * (points[k_d + 1] - points[k_d]))
        return r, r, 0.5 * (p_lo + p_hi)

    winners = np.flatnonzero(pair_vals >= top - _TIE_TOL)
    # triu_indices is row major, so the first winner is the smallest pair.
    i = int(winners[0])
    p_star = float(np.clip(best_p[i], p_lo, p_hi))
    a1_star = float(np.clip(best_a1[i], 0.0, 1.0 - p_star))
    a3_star = float(np.clip(best_a3[i], 0.0, p_star))
    t1 = a1_star / (1.0 - p_star)
    t3 = a3_star / p_star
    ka, kb = int(k1[i]), int(k3[i])
    r1 = float(points[ka] + np.clip(t1, 0.0, 1.0) * (points[ka + 1] - points[ka]))
    r3 = float(points[kb] + np.clip(t3, 0.0, 1.0) * (points[kb + 1] - points[kb]))
    return r1, r3, p_star


def cut_vector(grid: BreakpointGrid, q: QueryParams) -> CutVector:
    """Lottery features minus sure-side features for an answered choice."""
    ga = (1.0 - q.p) * g_of_x(grid, q.r1) + q.p * g_of_x(grid, q.r3)
    gb = g_of_x(grid, q.r2)
    return CutVector(lifted=tuple(float(t) for t in ga - gb))


def _support_warnings(grid: BreakpointGrid, v1: np.ndarray, v2: np.ndarray,
                      q: QueryParams) -> None:
    """Log when an amount falls on an interval the endpoint weights flat.

    The construction still balances the budget exactly, but a flat
    interval means the endpoint objective was indifferent there, which
    is worth surfacing when debugging uninformative runs.
    """
    def on_breakpoint(x: float) -> int | None:
        hits = np.flatnonzero(np.abs(grid.array - x) <= 1e-12)
        return int(hits[0]) if hits.size else None

    j = on_breakpoint(q.r2)
    if j is None:
        if v1[grid.interval_of(q.r2)] <= 0.0:
            logger.warning("sure amount %.6g sits on an interval with zero weight", q.r2)
    elif j < grid.n - 1 and v1[j] <= 0.0:
        logger.warning("sure amount %.6g sits at a breakpoint with zero right weight", q.r2)
    for label, r in (("low outcome", q.r1), ("high outcome", q.r3)):
        if on_breakpoint(r) is None and v2[grid.interval_of(r)] <= 0.0:
            logger.warning("%s %.6g sits on an interval with zero weight", label, r)


def generate_query(p: Polyhedron, grid: BreakpointGrid,
                   d_grid: tuple[float, ...] = DEFAULT_D_GRID,
                   p_bounds: tuple[float, float] = DEFAULT_P_BOUNDS,
                   ) -> tuple[QueryParams, CutVector]:
    """Best comparison across the budget levels.

    Every budget level yields one candidate query; candidates whose two
    sides coincide in feature space carry no information and are
    dropped. Among the rest the winner maximizes the cosine between its
    cut and the longest-axis direction; cosine ties go to the larger
    cut, remaining ties to the earliest budget level.
    """
    if not d_grid:
        raise ValueError("need at least one budget level")
    ac = analytic_center(p)
    axis = longest_axis_endpoints(p, ac)
    c_l = ac.lifted
    v1_l = lift(axis.v1)
    v2_l = lift(axis.v2)
    phi = v1_l - v2_l
    phi_norm = float(np.linalg.norm(phi))
    if phi_norm <= 1e-14:
        raise AllDegenerate("longest axis collapsed to a point")

    survivors: list[tuple[float, float, int, QueryParams, CutVector]] = []
    for s, d in enumerate(d_grid):
        r2 = solve_B(v1_l, c_l, grid, d)
        r1, r3, pp = solve_A(v2_l, c_l, grid, d, p_bounds)
        q = QueryParams(r1=r1, r2=r2, r3=r3, p=pp, D=float(d))
        cut = cut_vector(grid, q)
        norm = cut.norm
        if norm <= _ZERO_CUT_TOL:
            continue
        cosine = abs(float(cut.array @ phi)) / (norm * phi_norm)
        survivors.append((cosine, norm, s, q, cut))
    if not survivors:
        raise AllDegenerate("every budget level produced an uninformative query")

    best_cos = max(item[0] for item in survivors)
    pool = [item for item in survivors if item[0] >= best_cos - _TIE_TOL]
    best_norm = max(item[1] for item in pool)
    pool = [item for item in pool if item[1] >= best_norm - _TIE_TOL]
    _, _, _, q, cut = pool[0]
    _support_warnings(grid, v1_l, v2_l, q)
    return q, cut
