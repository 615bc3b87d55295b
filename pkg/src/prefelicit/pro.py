"""Portfolio selection that is robust to the unresolved part of a preference.

The elicited polyhedron rarely shrinks to a point, so a portfolio is judged
by its worst utility over every increment vector still compatible with the
recorded answers. The maximin problem becomes a single mixed-integer
program once each scenario's staircase feature is written through its
interval-selection encoding and the inner minimization is dualized.

Two dials trade robustness against performance. Both start from the box of
componentwise deviations around the analytic center: a budget dial lets at
most a prescribed total of coordinates stray from the center, while a
weight dial scales every coordinate's range by decreasing weights that an
adversary may reshuffle. Tightening either dial raises the reported value
toward the center estimate; relaxing them recovers the full worst case.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .numerics import (LinearProgram, MixedIntegerProgram, SimplexEngine,
                       solve_lp, solve_milp)
from .polyhedron import AnalyticCenter, Polyhedron, analytic_center
from .pwl import BreakpointGrid, PqEncoding


@dataclass(frozen=True)
class ProInstance:
    """Equally likely return scenarios over the elicited increment polytope.

    Portfolios live on the unit simplex and earn the weighted return
    z . xi in each scenario, so every attainable outcome stays inside the
    convex hull of the scenario coordinates. Each coordinate must land in
    the utility's outcome range; violations are a hard error rather than
    a silent clamp.
    """

    grid: BreakpointGrid
    polyhedron: Polyhedron
    scenarios: tuple[tuple[float, ...], ...]
    tickers: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if self.polyhedron.dim != self.grid.n - 2:
            raise ValueError("polyhedron dimension does not match the grid")
        if not self.scenarios:
            raise ValueError("instance needs at least one scenario")
        width = len(self.scenarios[0])
        if width < 1:
            raise ValueError("scenarios need at least one asset")
        for k, row in enumerate(self.scenarios):
            if len(row) != width:
                raise ValueError(f"scenario {k} has {len(row)} assets, expected {width}")
            for x in row:
                if not (self.grid.lo - 1e-12 <= float(x) <= self.grid.hi + 1e-12):
                    raise ValueError(
                        f"scenario {k} has return {x} outside the outcome "
                        f"range [{self.grid.lo}, {self.grid.hi}]"
                    )
        if self.tickers is not None and len(self.tickers) != width:
            raise ValueError("ticker count does not match the asset count")

    @property
    def n_assets(self) -> int:
        return len(self.scenarios[0])

    @property
    def n_scenarios(self) -> int:
        return len(self.scenarios)

    @property
    def returns(self) -> np.ndarray:
        return np.asarray(self.scenarios, dtype=float)


@dataclass(frozen=True)
class IncrementBox:
    """Componentwise deviation ranges around a reference increment vector."""

    center: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self) -> None:
        if np.any(self.lower < -1e-7) or np.any(self.upper < -1e-7):
            raise ValueError("deviation ranges must be nonnegative")

    def to_dict(self) -> dict:
        return {
            "center": [float(t) for t in self.center],
            "lower": [float(t) for t in self.lower],
            "upper": [float(t) for t in self.upper],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "IncrementBox":
        return cls(
            center=np.asarray(data["center"], dtype=float),
            lower=np.asarray(data["lower"], dtype=float),
            upper=np.asarray(data["upper"], dtype=float),
        )


@dataclass(frozen=True)
class ConservatismConfig:
    """Choice of dial: plain worst case, deviation budget, or shuffled weights."""

    scheme: str = "none"
    gamma: float | None = None
    budget: float | None = None
    mask: int | None = None

    def __post_init__(self) -> None:
        if self.scheme not in ("none", "budget", "gamma"):
            raise ValueError("scheme must be one of none, budget, gamma")
        if self.scheme == "gamma":
            if self.gamma is None:
                raise ValueError("gamma scheme needs a gamma in (0, 1]")
            if not (0.0 < self.gamma <= 1.0):
                raise ValueError("gamma must lie in (0, 1]")
            if self.budget is not None:
                raise ValueError("gamma scheme does not take a budget")
        elif self.scheme == "budget":
            if self.budget is None:
                raise ValueError("budget scheme needs a nonnegative budget")
            if self.budget < 0.0:
                raise ValueError("budget must be nonnegative")
            if self.gamma is not None:
                raise ValueError("budget scheme does not take a gamma")
        else:
            if self.gamma is not None or self.budget is not None:
                raise ValueError("plain scheme takes neither gamma nor budget")
        if self.mask is not None:
            if self.scheme != "gamma":
                raise ValueError("weight masking only applies to the gamma scheme")
            if self.mask < 1:
                raise ValueError("mask must keep at least one weight")

    def sigma_for(self, n_points: int) -> np.ndarray:
        """Weight vector for the gamma scheme on a grid of n_points breakpoints."""
        sigma = sigma_weights(self.gamma, n_points)
        if self.mask is not None:
            sigma = masked_sigma(sigma, self.mask)
        return sigma

    def to_dict(self) -> dict:
        return {"scheme": self.scheme, "gamma": self.gamma,
                "budget": self.budget, "mask": self.mask}

    @classmethod
    def from_dict(cls, data: dict) -> "ConservatismConfig":
        return cls(scheme=data.get("scheme", "none"), gamma=data.get("gamma"),
                   budget=data.get("budget"), mask=data.get("mask"))


@dataclass(frozen=True)
class DualCertificate:
    """Multipliers backing a solve, with the stationarity defect at optimality.

    The classic maximin reports simplex-row duals in ``base``; the
    conservative reformulations report box duals, the normalization dual
    and nonnegativity duals, plus the extra variables of their dial.
    ``cut`` always holds the answered-comparison duals.
    """

    scheme: str
    stationarity_residual: float
    cut: tuple[float, ...] = ()
    base: tuple[float, ...] | None = None
    lambda_lower: tuple[float, ...] | None = None
    lambda_upper: tuple[float, ...] | None = None
    beta: float | None = None
    eta: tuple[float, ...] | None = None
    tau: tuple[float, ...] | None = None
    tau_zero: float | None = None
    pair_matrix: tuple[tuple[float, ...], ...] | None = None
    tau_lower: tuple[float, ...] | None = None
    tau_upper: tuple[float, ...] | None = None


@dataclass(frozen=True)
class SweepPoint:
    """One solved dial setting, ready for CSV or JSON emission."""

    n_cuts: int
    scheme: str
    parameter: float
    value: float
    weights: tuple[float, ...]


def sigma_weights(gamma: float, n_points: int) -> np.ndarray:
    """Decreasing weights from the derivative of t ** gamma on a uniform grid.

    The i-th weight is the derivative at i / n_points normalized by the
    first, which collapses to i ** (gamma - 1). At gamma = 1 the curve is
    linear and every weight is one.
    """
    if not (0.0 < gamma <= 1.0):
        raise ValueError("gamma must lie in (0, 1]")
    if n_points < 3:
        raise ValueError("need at least three breakpoints")
    t = np.arange(1, n_points) / float(n_points)
    raw = gamma * t ** (gamma - 1.0)
    return raw / raw[0]


def masked_sigma(sigma: np.ndarray, keep: int) -> np.ndarray:
    """Zero out all but the first ``keep`` weights."""
    sigma = np.asarray(sigma, dtype=float)
    if not (1 <= keep <= sigma.size):
        raise ValueError("keep must lie between 1 and the number of weights")
    out = np.zeros_like(sigma)
    out[:keep] = sigma[:keep]
    return out


def _center_array(center: AnalyticCenter | np.ndarray, j: int) -> np.ndarray:
    if isinstance(center, AnalyticCenter):
        arr = center.lifted
    else:
        arr = np.asarray(center, dtype=float)
    if arr.shape != (j,):
        raise ValueError("center must be a full increment vector")
    return arr


def increment_bounds(p: Polyhedron, center: AnalyticCenter | np.ndarray) -> IncrementBox:
    """Extreme componentwise deviations of the polytope around a center.

    Each of the 2(N-1) bounds is one linear program over the reduced
    inequality system; the last coordinate rides on the normalization, so
    its extremes come from the total of the free coordinates.
    """
    j = p.dim + 1
    c = _center_array(center, j)
    a, b = p.rows()
    free = np.full(p.dim, -np.inf)

    def extremum(obj: np.ndarray, maximize: bool) -> float:
        res = solve_lp(LinearProgram(objective=obj, maximize=maximize,
                                     a_ub=a, b_ub=b, lower=free))
        if res.status != "optimal":
            raise RuntimeError(f"bound solve failed: {res.status}")
        return float(res.value)

    lo = np.zeros(j)
    hi = np.zeros(j)
    for i in range(p.dim):
        e = np.zeros(p.dim)
        e[i] = 1.0
        lo[i] = extremum(e, maximize=False)
        hi[i] = extremum(e, maximize=True)
    ones = np.ones(p.dim)
    lo[-1] = 1.0 - extremum(ones, maximize=True)
    hi[-1] = 1.0 - extremum(ones, maximize=False)
    lower = np.maximum(c - lo, 0.0)
    upper = np.maximum(hi - c, 0.0)
    if np.any(c - lo < -1e-7) or np.any(hi - c < -1e-7):
        raise ValueError("center lies outside the polytope")
    return IncrementBox(center=c, lower=lower, upper=upper)


def _cut_data(p: Polyhedron) -> list[tuple[np.ndarray, int]]:
    return [(np.asarray(w, dtype=float), h) for w, h in p.cuts]


def _mean_feature(inst: ProInstance, z: np.ndarray) -> np.ndarray:
    from .pwl import g_of_x

    rows = [g_of_x(inst.grid, float(np.dot(z, xi))) for xi in inst.returns]
    return np.mean(np.asarray(rows), axis=0)


def inner_worst_case(
    inst: ProInstance,
    z: np.ndarray,
    box: IncrementBox | None = None,
    config: ConservatismConfig | None = None,
) -> tuple[np.ndarray, float]:
    """Worst increment vector for a fixed portfolio, under the chosen dial.

    Args:
        inst: scenarios, grid and elicited cuts.
        z: portfolio weights, assumed on the simplex.
        box: deviation ranges around the center; required by both dials,
            optional tightening for the plain scheme.
        config: dial choice; None means the plain worst case.

    Returns:
        The minimizing increment vector and its average utility.
    """
    config = config or ConservatismConfig()
    z = np.asarray(z, dtype=float)
    j = inst.grid.n - 1
    gbar = _mean_feature(inst, z)
    cuts = _cut_data(inst.polyhedron)
    if config.scheme != "none" and box is None:
        raise ValueError(f"the {config.scheme} scheme needs a deviation box")

    if config.scheme == "none":
        a_ub = [np.asarray(h * w, dtype=float) for w, h in cuts]
        b_ub = [0.0] * len(cuts)
        lower = np.zeros(j)
        upper = np.full(j, np.inf)
        if box is not None:
            lower = np.maximum(lower, box.center - box.lower)
            upper = np.minimum(upper, box.center + box.upper)
        lp = LinearProgram(
            objective=gbar, maximize=False,
            a_ub=np.asarray(a_ub) if a_ub else None,
            b_ub=np.asarray(b_ub) if b_ub else None,
            a_eq=np.ones((1, j)), b_eq=np.array([1.0]),
            lower=lower, upper=upper,
        )
        res = solve_lp(lp)
        if res.status != "optimal":
            raise RuntimeError(f"worst-case solve failed: {res.status}")
        return res.x.copy(), float(res.value)

    if config.scheme == "budget":
        budget = float(config.budget)
        if budget > j + 1e-9:
            raise ValueError("budget cannot exceed the number of increments")
        total = 2 * j
        a_ub, b_ub = [], []
        for i in range(j):
            row = np.zeros(total)
            row[i] = -1.0
            row[j + i] = -box.lower[i]
            a_ub.append(row)
            b_ub.append(-box.center[i])
            row = np.zeros(total)
            row[i] = 1.0
            row[j + i] = -box.upper[i]
            a_ub.append(row)
            b_ub.append(box.center[i])
        for w, h in cuts:
            a_ub.append(np.concatenate([h * w, np.zeros(j)]))
            b_ub.append(0.0)
        a_eq = [np.concatenate([np.ones(j), np.zeros(j)]),
                np.concatenate([np.zeros(j), np.ones(j)])]
        b_eq = [1.0, budget]
        lp = LinearProgram(
            objective=np.concatenate([gbar, np.zeros(j)]), maximize=False,
            a_ub=np.asarray(a_ub), b_ub=np.asarray(b_ub),
            a_eq=np.asarray(a_eq), b_eq=np.asarray(b_eq),
            lower=np.zeros(total),
            upper=np.concatenate([np.full(j, np.inf), np.ones(j)]),
        )
        res = solve_lp(lp)
        if res.status != "optimal":
            raise RuntimeError(f"worst-case solve failed: {res.status}")
        return res.x[:j].copy(), float(res.value)

    sigma = config.sigma_for(inst.grid.n)
    total = j + j * j
    a_ub, b_ub = [], []
    for i in range(j):
        row = np.zeros(total)
        row[i] = -1.0
        row[j + i * j:j + (i + 1) * j] = -box.lower[i] * sigma
        a_ub.append(row)
        b_ub.append(-box.center[i])
        row = np.zeros(total)
        row[i] = 1.0
        row[j + i * j:j + (i + 1) * j] = -box.upper[i] * sigma
        a_ub.append(row)
        b_ub.append(box.center[i])
    for w, h in cuts:
        a_ub.append(np.concatenate([h * w, np.zeros(j * j)]))
        b_ub.append(0.0)
    a_eq = [np.concatenate([np.ones(j), np.zeros(j * j)])]
    b_eq = [1.0]
    for i in range(j):
        row = np.zeros(total)
        row[j + i * j:j + (i + 1) * j] = 1.0
        a_eq.append(row)
        b_eq.append(1.0)
    for col in range(j):
        row = np.zeros(total)
        row[j + col::j] = 1.0
        a_eq.append(row)
        b_eq.append(1.0)
    lp = LinearProgram(
        objective=np.concatenate([gbar, np.zeros(j * j)]), maximize=False,
        a_ub=np.asarray(a_ub), b_ub=np.asarray(b_ub),
        a_eq=np.asarray(a_eq), b_eq=np.asarray(b_eq),
        lower=np.zeros(total),
        upper=np.concatenate([np.full(j, np.inf), np.ones(j * j)]),
    )
    res = solve_lp(lp)
    if res.status != "optimal":
        raise RuntimeError(f"worst-case solve failed: {res.status}")
    return res.x[:j].copy(), float(res.value)


class _JointProgram:
    """Shared scaffolding for the maximin programs: one dual head plus, for
    every scenario, the interval-selection rows that realize its feature
    vector at the chosen portfolio."""

    def __init__(self, inst: ProInstance, head: int) -> None:
        self.inst = inst
        self.j = inst.grid.n - 1
        self.k = inst.n_scenarios
        self.n = inst.n_assets
        self.head = head
        self.total = head + 2 * self.j * self.k
        enc = PqEncoding(inst.grid)
        self.p_mat = enc.p_matrix
        self.q_mat = enc.q_matrix
        self.objective = np.zeros(self.total)
        self.a_ub: list[np.ndarray] = []
        self.b_ub: list[float] = []
        self.a_eq: list[np.ndarray] = []
        self.b_eq: list[float] = []
        self.lower = np.zeros(self.total)
        self.upper = np.full(self.total, np.inf)
        self.binary: list[int] = []
        self.groups: list[list[int]] = []
        self.implied: dict[int, list[int]] = {}

    def y_slice(self, k: int) -> slice:
        start = self.head + 2 * self.j * k
        return slice(start, start + self.j)

    def w_slice(self, k: int) -> slice:
        start = self.head + 2 * self.j * k + self.j
        return slice(start, start + self.j)

    def add_scenario_rows(self) -> None:
        pts = self.inst.grid.array
        returns = self.inst.returns
        for k in range(self.k):
            ys, ws = self.y_slice(k), self.w_slice(k)
            for jj in range(self.j):
                row = np.zeros(self.total)
                row[ys.start + jj] = 1.0
                row[ws.start + jj] = -pts[jj + 1]
                self.a_ub.append(row)
                self.b_ub.append(0.0)
                row = np.zeros(self.total)
                row[ys.start + jj] = -1.0
                row[ws.start + jj] = pts[jj]
                self.a_ub.append(row)
                self.b_ub.append(0.0)
                self.lower[ys.start + jj] = min(0.0, pts[jj])
                self.upper[ys.start + jj] = max(0.0, pts[jj + 1])
                self.upper[ws.start + jj] = 1.0
            row = np.zeros(self.total)
            row[ws] = 1.0
            self.a_eq.append(row)
            self.b_eq.append(1.0)
            row = np.zeros(self.total)
            row[ys] = 1.0
            row[:self.n] = -returns[k]
            self.a_eq.append(row)
            self.b_eq.append(0.0)
            self.binary.extend(range(ws.start, ws.stop))
            self.groups.append(list(range(ws.start, ws.stop)))
            for jj in range(self.j):
                self.implied[ws.start + jj] = [ys.start + jj]
        row = np.zeros(self.total)
        row[:self.n] = 1.0
        self.a_eq.append(row)
        self.b_eq.append(1.0)

    def feature_coeff(self, k: int, component: int) -> tuple[np.ndarray, np.ndarray]:
        """Coefficients of the k-th scenario's feature component on (y, w)."""
        return self.p_mat[component] / self.k, self.q_mat[component] / self.k

    def _interval_of(self, r: float) -> int:
        pts = self.inst.grid.array
        a = int(np.searchsorted(pts, r, side="right") - 1)
        return min(max(a, 0), self.j - 1)

    def _warm_start(self, engine: SimplexEngine) -> tuple[np.ndarray, float] | None:
        """Feasible point from rounding the relaxation's portfolio.

        The relaxed portfolio pins each scenario return to one interval;
        fixing the selectors accordingly leaves a plain linear program
        whose optimum is integral and primes branch-and-bound pruning.
        Reassigning intervals from the improved portfolio and repeating
        usually lands within a hair of the true optimum.
        """
        root, state = engine.solve()
        if root.status != "optimal":
            return None
        z = root.x[:self.n].copy()
        best: tuple[np.ndarray, float] | None = None
        seen: set[tuple[int, ...]] = set()
        for _ in range(4):
            assign = tuple(self._interval_of(float(np.dot(z, xi)))
                           for xi in self.inst.returns)
            if assign in seen:
                break
            seen.add(assign)
            lo, up = self.lower.copy(), self.upper.copy()
            for k, a in enumerate(assign):
                ys, ws = self.y_slice(k), self.w_slice(k)
                for jj in range(self.j):
                    if jj == a:
                        continue
                    lo[ws.start + jj] = up[ws.start + jj] = 0.0
                    lo[ys.start + jj] = up[ys.start + jj] = 0.0
                lo[ws.start + a] = up[ws.start + a] = 1.0
            res, state = engine.solve(lower=lo, upper=up, warm=state)
            if res.status != "optimal":
                break
            if best is None or res.value > best[1]:
                best = (res.x.copy(), float(res.value))
            z = res.x[:self.n].copy()
        return best

    def solve(self) -> np.ndarray:
        lp = LinearProgram(
            objective=self.objective, maximize=True,
            a_ub=np.asarray(self.a_ub) if self.a_ub else None,
            b_ub=np.asarray(self.b_ub, dtype=float) if self.b_ub else None,
            a_eq=np.asarray(self.a_eq), b_eq=np.asarray(self.b_eq, dtype=float),
            lower=self.lower, upper=self.upper,
        )
        engine = SimplexEngine(lp)
        warm = self._warm_start(engine)
        res = solve_milp(MixedIntegerProgram(lp=lp, binary=self.binary,
                                             sos1_groups=self.groups,
                                             implied_zero=self.implied),
                         warm_x=None if warm is None else warm[0],
                         warm_value=None if warm is None else warm[1],
                         engine=engine)
        if res.status != "optimal":
            raise RuntimeError(f"maximin solve ended with status {res.status}")
        self.value = float(res.value)
        return res.x

    def mean_encoded_feature(self, x: np.ndarray) -> np.ndarray:
        out = np.zeros(self.j)
        for k in range(self.k):
            out += self.p_mat @ x[self.y_slice(k)] + self.q_mat @ x[self.w_slice(k)]
        return out / self.k


def solve_pro_classic(inst: ProInstance) -> tuple[np.ndarray, float, DualCertificate]:
    """Maximin portfolio over the full elicited polytope.

    The inner minimization is replaced by its dual, whose multipliers
    cover the simplex rows and the answered comparisons; joining the
    outer portfolio choice yields one mixed-integer program whose only
    integrality is the interval selection per scenario.
    """
    j = inst.grid.n - 1
    n = inst.n_assets
    cuts = _cut_data(inst.polyhedron)
    m = len(cuts)
    head = n + j + m
    prog = _JointProgram(inst, head)
    off_lam, off_eta = n, n + j

    # value: last component of the combined vector, minus the simplex dual
    for k in range(prog.k):
        py, qw = prog.feature_coeff(k, j - 1)
        prog.objective[prog.y_slice(k)] += py
        prog.objective[prog.w_slice(k)] += qw
    for mm, (w, h) in enumerate(cuts):
        prog.objective[off_eta + mm] += h * w[-1]
    prog.objective[off_lam] -= 1.0

    # stationarity in the reduced coordinates
    for r in range(j - 1):
        row = np.zeros(prog.total)
        for k in range(prog.k):
            py_r, qw_r = prog.feature_coeff(k, r)
            py_last, qw_last = prog.feature_coeff(k, j - 1)
            row[prog.y_slice(k)] += py_r - py_last
            row[prog.w_slice(k)] += qw_r - qw_last
        for mm, (w, h) in enumerate(cuts):
            row[off_eta + mm] += h * (w[r] - w[-1])
        row[off_lam] += 1.0
        row[off_lam + 1 + r] -= 1.0
        prog.a_eq.append(row)
        prog.b_eq.append(0.0)

    prog.add_scenario_rows()
    x = prog.solve()

    z = x[:n].copy()
    lam = x[off_lam:off_lam + j]
    eta = x[off_eta:off_eta + m]
    combined = prog.mean_encoded_feature(x)
    for mm, (w, h) in enumerate(cuts):
        combined = combined + eta[mm] * h * w
    residual = 0.0
    for r in range(j - 1):
        residual = max(residual, abs(combined[r] - combined[-1] + lam[0] - lam[1 + r]))
    cert = DualCertificate(
        scheme="classic",
        stationarity_residual=float(residual),
        base=tuple(float(t) for t in lam),
        cut=tuple(float(t) for t in eta),
    )
    return z, prog.value, cert


def solve_pro_conservative(
    inst: ProInstance,
    config: ConservatismConfig,
    box: IncrementBox | None = None,
) -> tuple[np.ndarray, float, DualCertificate]:
    """Maximin portfolio with the worst case narrowed by the chosen dial.

    The inner problem over the boxed polytope is dualized, the dial's
    extra variables are appended, and the outer portfolio choice is merged
    in through the scenario selection rows. With no dial this equals the
    classic solve, since the deviation box spans the whole polytope.
    """
    if box is None:
        box = increment_bounds(inst.polyhedron, analytic_center(inst.polyhedron))
    j = inst.grid.n - 1
    n = inst.n_assets
    cuts = _cut_data(inst.polyhedron)
    m = len(cuts)
    c = box.center

    sigma: np.ndarray | None = None
    if config.scheme == "budget":
        if config.budget > j + 1e-9:
            raise ValueError("budget cannot exceed the number of increments")
        extra = j + 1
    elif config.scheme == "gamma":
        sigma = config.sigma_for(inst.grid.n)
        extra = j * j + 2 * j
    else:
        extra = 0

    head = n + 2 * j + 1 + j + m + extra
    prog = _JointProgram(inst, head)
    off_llo = n
    off_lhi = n + j
    off_beta = n + 2 * j
    off_eta = off_beta + 1
    off_theta = off_eta + j
    off_extra = off_theta + m
    prog.lower[off_beta] = -np.inf

    # center-evaluated part of the objective
    for k in range(prog.k):
        for i in range(j):
            py, qw = prog.feature_coeff(k, i)
            prog.objective[prog.y_slice(k)] += c[i] * py
            prog.objective[prog.w_slice(k)] += c[i] * qw
    prog.objective[off_eta:off_eta + j] -= c
    for mm, (w, h) in enumerate(cuts):
        prog.objective[off_theta + mm] += h * float(c @ w)

    if config.scheme == "none":
        prog.objective[off_llo:off_llo + j] -= box.lower
        prog.objective[off_lhi:off_lhi + j] -= box.upper
    elif config.scheme == "budget":
        off_tau, off_tau0 = off_extra, off_extra + j
        prog.objective[off_tau:off_tau + j] -= 1.0
        prog.objective[off_tau0] -= float(config.budget)
        prog.lower[off_tau0] = -np.inf
        for i in range(j):
            row = np.zeros(prog.total)
            row[off_llo + i] = box.lower[i]
            row[off_lhi + i] = box.upper[i]
            row[off_tau + i] = -1.0
            row[off_tau0] = -1.0
            prog.a_ub.append(row)
            prog.b_ub.append(0.0)
    else:
        off_pair = off_extra
        off_tlo = off_extra + j * j
        off_thi = off_tlo + j
        prog.objective[off_pair:off_pair + j * j] -= 1.0
        prog.objective[off_tlo:off_thi + j] -= 1.0
        prog.lower[off_tlo:off_thi + j] = -np.inf
        for i in range(j):
            for col in range(j):
                row = np.zeros(prog.total)
                row[off_llo + i] = box.lower[i] * sigma[col]
                row[off_lhi + i] = box.upper[i] * sigma[col]
                row[off_tlo + i] = -1.0
                row[off_thi + col] = -1.0
                row[off_pair + i * j + col] = -1.0
                prog.a_ub.append(row)
                prog.b_ub.append(0.0)

    # stationarity of the dualized inner problem, one row per increment
    for i in range(j):
        row = np.zeros(prog.total)
        for k in range(prog.k):
            py, qw = prog.feature_coeff(k, i)
            row[prog.y_slice(k)] += py
            row[prog.w_slice(k)] += qw
        row[off_llo + i] = -1.0
        row[off_lhi + i] = 1.0
        row[off_beta] = 1.0
        row[off_eta + i] = -1.0
        for mm, (w, h) in enumerate(cuts):
            row[off_theta + mm] += h * w[i]
        prog.a_eq.append(row)
        prog.b_eq.append(0.0)

    prog.add_scenario_rows()
    x = prog.solve()

    z = x[:n].copy()
    lam_lo = x[off_llo:off_llo + j]
    lam_hi = x[off_lhi:off_lhi + j]
    beta = float(x[off_beta])
    eta = x[off_eta:off_eta + j]
    theta = x[off_theta:off_theta + m]
    combined = prog.mean_encoded_feature(x) - lam_lo + lam_hi + beta - eta
    for mm, (w, h) in enumerate(cuts):
        combined = combined + theta[mm] * h * w
    residual = float(np.max(np.abs(combined))) if j else 0.0

    tau = tau_zero = pair = tau_lower = tau_upper = None
    if config.scheme == "budget":
        tau = tuple(float(t) for t in x[off_extra:off_extra + j])
        tau_zero = float(x[off_extra + j])
    elif config.scheme == "gamma":
        flat = x[off_extra:off_extra + j * j]
        pair = tuple(tuple(float(t) for t in flat[i * j:(i + 1) * j]) for i in range(j))
        tau_lower = tuple(float(t) for t in x[off_extra + j * j:off_extra + j * j + j])
        tau_upper = tuple(float(t) for t in x[off_extra + j * j + j:off_extra + j * j + 2 * j])

    cert = DualCertificate(
        scheme=config.scheme,
        stationarity_residual=residual,
        cut=tuple(float(t) for t in theta),
        lambda_lower=tuple(float(t) for t in lam_lo),
        lambda_upper=tuple(float(t) for t in lam_hi),
        beta=beta,
        eta=tuple(float(t) for t in eta),
        tau=tau,
        tau_zero=tau_zero,
        pair_matrix=pair,
        tau_lower=tau_lower,
        tau_upper=tau_upper,
    )
    return z, prog.value, cert


def conservatism_sweep(
    inst: ProInstance,
    scheme: str,
    params,
    box: IncrementBox | None = None,
    max_workers: int = 1,
) -> list[SweepPoint]:
    """Solve one dial across several settings; points are independent solves."""
    if scheme not in ("budget", "gamma"):
        raise ValueError("sweeps cover the budget and gamma schemes")
    if box is None:
        box = increment_bounds(inst.polyhedron, analytic_center(inst.polyhedron))
    n_cuts = len(inst.polyhedron.cuts)

    def solve_one(param: float) -> SweepPoint:
        if scheme == "budget":
            cfg = ConservatismConfig(scheme="budget", budget=float(param))
        else:
            cfg = ConservatismConfig(scheme="gamma", gamma=float(param))
        z, value, _ = solve_pro_conservative(inst, cfg, box=box)
        return SweepPoint(n_cuts=n_cuts, scheme=scheme, parameter=float(param),
                          value=value, weights=tuple(float(t) for t in z))

    params = [float(p) for p in params]
    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            return list(pool.map(solve_one, params))
    return [solve_one(p) for p in params]
