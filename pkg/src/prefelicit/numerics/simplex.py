"""Bounded-variable revised simplex with warm-started resolves.

Variable bounds stay native here: a nonbasic variable sits at one of its
finite bounds (or at zero when free), an entering step may end in a bound
flip instead of a pivot, and a variable whose bounds coincide never
prices in. Inequality rows carry explicit slacks; artificial columns
appear only for rows that start infeasible and are pinned to zero once
the feasibility phase ends. The basis inverse is kept explicitly with
eta-style pivot updates and periodic refactorization. Pricing is
Dantzig's rule with an automatic switch to Bland's rule once the
iteration count passes a threshold, which guarantees termination on
degenerate problems.

A finished basis can be handed back to :class:`SimplexEngine` together
with tightened bounds; the dual simplex then restores feasibility in a
few pivots instead of resolving from scratch. Branch-and-bound leans on
that path for its node relaxations.

The public entry point for one-off solves is :func:`solve_lp`, which
accepts problems in a general form (maximize or minimize, inequality and
equality rows, per variable bounds including infinities) and reports
primal solutions together with row duals in sensitivity convention:
``dual_ub[i]`` is the rate of change of the optimal value per unit
increase of ``b_ub[i]``, and likewise for ``dual_eq``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import blas

from .tolerances import DEFAULT_TOLS, Tolerances

_REFACTOR_EVERY = 128
_PIVOT_TOL = 1e-9


@dataclass
class LinearProgram:
    """General-form linear program.

    Attributes:
        objective: coefficient vector of length n.
        maximize: optimization sense, True for maximization.
        a_ub: inequality matrix for rows ``a_ub @ x <= b_ub`` (may be None).
        b_ub: inequality right-hand sides.
        a_eq: equality matrix for rows ``a_eq @ x == b_eq`` (may be None).
        b_eq: equality right-hand sides.
        lower: per-variable lower bounds, ``-inf`` allowed; defaults to 0.
        upper: per-variable upper bounds, ``+inf`` allowed; defaults to +inf.
    """

    objective: np.ndarray
    maximize: bool = True
    a_ub: np.ndarray | None = None
    b_ub: np.ndarray | None = None
    a_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None


@dataclass
class LpResult:
    """Outcome of a linear program solve.

    ``status`` is one of ``optimal``, ``infeasible``, ``unbounded`` or
    ``iteration_limit``. Primal and dual fields are None unless the status
    is ``optimal``.
    """

    status: str
    value: float | None = None
    x: np.ndarray | None = None
    dual_ub: np.ndarray | None = None
    dual_eq: np.ndarray | None = None
    iterations: int = 0


@dataclass
class BasisState:
    """Snapshot of a finished basis, reusable as a warm start.

    Attributes:
        idx: basic column index per row.
        at_upper: which nonbasic columns rest at their upper bound.
    """

    idx: np.ndarray
    at_upper: np.ndarray

    def copy(self) -> "BasisState":
        return BasisState(idx=self.idx.copy(), at_upper=self.at_upper.copy())


class _Basis:
    """Basis bookkeeping with an explicitly maintained inverse.

    Column indices at or past ``real`` denote implicit artificial
    columns, unit vectors that are never stored in the matrix. The
    inverse is kept column-major so pivot updates can run as one
    in-place BLAS rank-1 call instead of allocating a fresh matrix.
    """

    def __init__(self, a: np.ndarray, idx: np.ndarray, real: int) -> None:
        self.a = a
        self.idx = idx
        self.real = real
        self.refresh()

    def refresh(self) -> None:
        m = self.a.shape[0]
        mat = np.zeros((m, m))
        is_real = self.idx < self.real
        mat[:, is_real] = self.a[:, self.idx[is_real]]
        arts = np.where(~is_real)[0]
        mat[self.idx[arts] - self.real, arts] = 1.0
        self.inv = np.asfortranarray(np.linalg.inv(mat))
        self.pivots = 0

    def ftran(self, col: int) -> np.ndarray:
        """Basis direction of one column, artificial ones for free."""
        if col < self.real:
            return self.inv @ self.a[:, col]
        return self.inv[:, col - self.real].copy()

    def replace(self, row: int, col: int) -> None:
        direction = self.ftran(col)
        self.idx[row] = col
        self.pivots += 1
        if self.pivots >= _REFACTOR_EVERY:
            self.refresh()
            return
        piv = direction[row]
        pivot_row = self.inv[row] / piv
        self.inv = blas.dger(-1.0, direction, pivot_row, a=self.inv,
                             overwrite_a=1, overwrite_x=0, overwrite_y=0)
        self.inv[row] = pivot_row


class SimplexEngine:
    """Reusable solver bound to one constraint matrix.

    The matrix and objective are fixed at construction; every call to
    :meth:`solve` may override the structural variable bounds, which is
    exactly the shape of a branch-and-bound node. Passing the previous
    node's :class:`BasisState` turns the solve into a dual-simplex
    repair, typically a handful of pivots.
    """

    def __init__(self, problem: LinearProgram) -> None:
        c0 = np.asarray(problem.objective, dtype=float)
        self.n = c0.size
        self.maximize = bool(problem.maximize)
        a_ub = (np.zeros((0, self.n)) if problem.a_ub is None
                else np.atleast_2d(np.asarray(problem.a_ub, dtype=float)))
        b_ub = (np.zeros(0) if problem.b_ub is None
                else np.atleast_1d(np.asarray(problem.b_ub, dtype=float)))
        a_eq = (np.zeros((0, self.n)) if problem.a_eq is None
                else np.atleast_2d(np.asarray(problem.a_eq, dtype=float)))
        b_eq = (np.zeros(0) if problem.b_eq is None
                else np.atleast_1d(np.asarray(problem.b_eq, dtype=float)))
        if a_ub.shape != (b_ub.size, self.n) or a_eq.shape != (b_eq.size, self.n):
            raise ValueError("constraint matrix shape mismatch")
        self.m_eq, self.m_ub = b_eq.size, b_ub.size
        self.m = self.m_eq + self.m_ub
        self.b = np.concatenate([b_eq, b_ub])
        # stored columns: structural | slack (one per <= row); the
        # artificial block is implicit, one unit column per row, indexed
        # from ``real`` up so bookkeeping arrays cover it without the
        # matrix carrying it
        self.real = self.n + self.m_ub
        self.width = self.real + self.m
        a = np.zeros((self.m, self.real))
        a[:self.m_eq, :self.n] = a_eq
        a[self.m_eq:, :self.n] = a_ub
        for k in range(self.m_ub):
            a[self.m_eq + k, self.n + k] = 1.0
        self.a = a
        self.c_struct = (-c0) if self.maximize else c0
        self.base_lower = (np.zeros(self.n) if problem.lower is None
                           else np.asarray(problem.lower, dtype=float))
        self.base_upper = (np.full(self.n, np.inf) if problem.upper is None
                           else np.asarray(problem.upper, dtype=float))
        if self.base_lower.size != self.n or self.base_upper.size != self.n:
            raise ValueError("bound vectors must match objective length")
        self.objective = c0
        # last factorized basis and its bound sides, reused as the next
        # warm start so repeated solves rarely pay a refactorization
        self._live: tuple[_Basis, np.ndarray] | None = None

    def _full_bounds(self, lower: np.ndarray | None,
                     upper: np.ndarray | None) -> tuple[np.ndarray, np.ndarray]:
        lo = np.full(self.width, 0.0)
        hi = np.full(self.width, np.inf)
        struct_lo = self.base_lower if lower is None else np.asarray(lower, dtype=float)
        struct_hi = self.base_upper if upper is None else np.asarray(upper, dtype=float)
        if struct_lo.size != self.n or struct_hi.size != self.n:
            raise ValueError("bound vectors must match objective length")
        lo[:self.n] = struct_lo
        hi[:self.n] = struct_hi
        if np.any(lo[:self.n] > hi[:self.n]):
            raise ValueError("lower bound exceeds upper bound")
        hi[self.real:] = 0.0  # artificials pinned unless phase one opens them
        return lo, hi

    def _phase2_costs(self) -> np.ndarray:
        c = np.zeros(self.width)
        c[:self.n] = self.c_struct
        return c

    def solve(self, lower: np.ndarray | None = None,
              upper: np.ndarray | None = None,
              warm: BasisState | None = None,
              tols: Tolerances = DEFAULT_TOLS,
              max_iter: int = 20000) -> tuple[LpResult, BasisState | None]:
        """Solve under the given structural bounds.

        Args:
            lower, upper: structural bound overrides; None keeps the
                bounds recorded at construction.
            warm: basis to repair via the dual simplex instead of a cold
                start; it is copied, never mutated.
            tols: numeric thresholds; defaults to the package-wide record.
            max_iter: hard iteration cap across all phases.

        Returns:
            The result plus, on an optimal finish, the final basis for
            reuse as a later warm start.
        """
        lo, hi = self._full_bounds(lower, upper)
        if warm is not None:
            out = self._solve_warm(warm, lo, hi, tols, max_iter)
            if out is not None:
                return out
            # fall through to a cold start when the repair stalls
        return self._solve_cold(lo, hi, tols, max_iter)

    # -- shared machinery -------------------------------------------------

    def _values(self, vals: np.ndarray, basis: _Basis, x_b: np.ndarray) -> np.ndarray:
        full = vals.copy()
        full[basis.idx] = x_b
        return full

    def _nonbasic_real(self, basis: _Basis, vals: np.ndarray) -> np.ndarray:
        """Stored-column values with basic entries zeroed.

        Nonbasic artificials always sit at zero, so the implicit block
        never contributes and the result stays matrix-width.
        """
        v = vals[:self.real].copy()
        inside = basis.idx[basis.idx < self.real]
        v[inside] = 0.0
        return v

    def _compute_xb(self, basis: _Basis, vals: np.ndarray) -> np.ndarray:
        v = self._nonbasic_real(basis, vals)
        return basis.inv @ (self.b - self.a @ v)

    def _reduced(self, costs: np.ndarray, basis: _Basis) -> np.ndarray:
        y = basis.inv.T @ costs[basis.idx]
        d = np.empty(self.width)
        d[:self.real] = costs[:self.real] - self.a.T @ y
        d[self.real:] = costs[self.real:] - y
        d[basis.idx] = 0.0
        return d

    def _primal(self, costs: np.ndarray, basis: _Basis, vals: np.ndarray,
                at_upper: np.ndarray, lo: np.ndarray, hi: np.ndarray,
                x_b: np.ndarray, tols: Tolerances, max_iter: int,
                budget: list[int]) -> str:
        """Run primal iterations in place; returns a terminal status."""
        a = self.a
        fixed = lo == hi
        free = ~np.isfinite(lo) & ~np.isfinite(hi)
        bland_after = max(200, 4 * (self.m + self.width))
        it = 0
        while budget[0] < max_iter:
            it += 1
            budget[0] += 1
            d = self._reduced(costs, basis)
            down = at_upper | (free & (d > 0))
            improving = np.where(
                ~fixed & ((~down & (d < -tols.optimality))
                          | (down & (d > tols.optimality))))[0]
            if improving.size == 0:
                return "optimal"
            if it > bland_after:
                j = int(improving[0])
            else:
                j = int(improving[np.argmax(np.abs(d[improving]))])
            t = -1.0 if down[j] else 1.0
            u = basis.ftran(j)
            tu = t * u
            basic_lo = lo[basis.idx]
            basic_hi = hi[basis.idx]
            ratios = np.full(self.m, np.inf)
            dec = tu > _PIVOT_TOL
            inc = tu < -_PIVOT_TOL
            with np.errstate(invalid="ignore"):
                cand = dec & np.isfinite(basic_lo)
                ratios[cand] = np.maximum(
                    (x_b[cand] - basic_lo[cand]) / tu[cand], 0.0)
                cand = inc & np.isfinite(basic_hi)
                ratios[cand] = np.maximum(
                    (x_b[cand] - basic_hi[cand]) / tu[cand], 0.0)
            span = hi[j] - lo[j]
            theta_row = float(np.min(ratios)) if self.m else np.inf
            theta = min(theta_row, span)
            if not np.isfinite(theta):
                return "unbounded"
            if theta_row <= span:
                ties = np.where(ratios <= theta_row + 1e-12)[0]
                if it > bland_after:
                    r = int(ties[np.argmin(basis.idx[ties])])
                else:
                    r = int(ties[np.argmax(np.abs(tu[ties]))])
                leave = int(basis.idx[r])
                x_b -= tu * theta
                new_val = vals[j] + t * theta
                if tu[r] > 0:
                    vals[leave] = lo[leave]
                    at_upper[leave] = False
                else:
                    vals[leave] = hi[leave]
                    at_upper[leave] = True
                basis.replace(r, j)
                if basis.pivots == 0:  # refactorized; recompute for hygiene
                    x_b[:] = self._compute_xb(basis, vals)
                else:
                    x_b[r] = new_val
            else:
                # the entering variable crosses to its other bound
                x_b -= tu * span
                at_upper[j] = not at_upper[j]
                vals[j] = hi[j] if at_upper[j] else lo[j]
        return "iteration_limit"

    def _dual(self, basis: _Basis, vals: np.ndarray, at_upper: np.ndarray,
              lo: np.ndarray, hi: np.ndarray, x_b: np.ndarray,
              tols: Tolerances, max_iter: int, budget: list[int]) -> str:
        """Restore primal feasibility while keeping dual feasibility.

        Reduced costs and the nonbasic column contribution are maintained
        incrementally across pivots and rebuilt whenever the basis
        refactorizes, so one pivot costs one matrix row plus a few
        backsolves instead of several full matrix passes.
        """
        a = self.a
        costs = self._phase2_costs()
        fixed = lo == hi
        free = ~np.isfinite(lo) & ~np.isfinite(hi)
        bland_after = max(100, self.m)
        it = 0

        def rebuild() -> tuple[np.ndarray, np.ndarray]:
            contrib = a @ self._nonbasic_real(basis, vals)
            return contrib, self._reduced(costs, basis)

        av, d = rebuild()
        x_b[:] = basis.inv @ (self.b - av)
        alpha = np.empty(self.width)
        while budget[0] < max_iter:
            basic_lo = lo[basis.idx]
            basic_hi = hi[basis.idx]
            below = basic_lo - x_b
            above = x_b - basic_hi
            viol = np.maximum(below, above)
            worst = float(np.max(viol)) if self.m else 0.0
            if worst <= 1e-9:
                return "feasible"
            it += 1
            budget[0] += 1
            if it > bland_after:
                r = int(np.argmax(viol > 1e-9))
            else:
                r = int(np.argmax(viol))
            sigma = 1.0 if below[r] >= above[r] else -1.0
            rho = basis.inv[r]
            alpha[:self.real] = rho @ a
            alpha[self.real:] = rho
            sig_alpha = sigma * alpha
            can = ~fixed
            can[basis.idx] = False
            enter_up = can & (~at_upper | free) & (sig_alpha < -_PIVOT_TOL)
            enter_dn = can & (at_upper | free) & (sig_alpha > _PIVOT_TOL)
            cand = np.where(enter_up | enter_dn)[0]
            if cand.size == 0:
                return "infeasible"
            mu = np.abs(d[cand] / alpha[cand])
            if it > bland_after:
                q = int(cand[0])
            else:
                best = float(np.min(mu))
                ties = cand[mu <= best + 1e-12]
                q = int(ties[np.argmax(np.abs(alpha[ties]))])
            leave = int(basis.idx[r])
            if sigma > 0:
                vals[leave] = lo[leave]
                at_upper[leave] = False
            else:
                vals[leave] = hi[leave]
                at_upper[leave] = True
            step = d[q] / alpha[q]
            # implicit artificial columns never carry a nonzero nonbasic
            # value, so only stored columns adjust the contribution
            if leave < self.real and vals[leave] != 0.0:
                av += a[:, leave] * vals[leave]
            if q < self.real and vals[q] != 0.0:
                av -= a[:, q] * vals[q]
            basis.replace(r, q)
            if basis.pivots == 0:
                av, d = rebuild()
            else:
                d -= step * alpha
                d[q] = 0.0
            x_b[:] = basis.inv @ (self.b - av)
        return "iteration_limit"

    # -- drivers ----------------------------------------------------------

    def _init_state(self, lo: np.ndarray,
                    hi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        at_upper = ~np.isfinite(lo) & np.isfinite(hi)
        vals = np.where(at_upper, hi, lo)
        vals[~np.isfinite(vals)] = 0.0
        return vals, at_upper

    def _snapshot(self, basis: _Basis, at_upper: np.ndarray) -> BasisState:
        return BasisState(idx=basis.idx.copy(), at_upper=at_upper.copy())

    def _finish(self, basis: _Basis, vals: np.ndarray, at_upper: np.ndarray,
                x_b: np.ndarray, iterations: int) -> tuple[LpResult, BasisState]:
        full = self._values(vals, basis, x_b)
        x = full[:self.n].copy()
        value = float(self.objective @ x)
        c2 = self._phase2_costs()
        y = basis.inv.T @ c2[basis.idx]
        sense = -1.0 if self.maximize else 1.0
        dual_eq = sense * y[:self.m_eq]
        dual_ub = sense * y[self.m_eq:]
        res = LpResult(status="optimal", value=value, x=x,
                       dual_ub=dual_ub.copy(), dual_eq=dual_eq.copy(),
                       iterations=iterations)
        self._live = (basis, at_upper)
        return res, self._snapshot(basis, at_upper)

    def _solve_cold(self, lo: np.ndarray, hi: np.ndarray, tols: Tolerances,
                    max_iter: int) -> tuple[LpResult, BasisState | None]:
        vals, at_upper = self._init_state(lo, hi)
        resid = self.b - self.a[:, :self.n] @ vals[:self.n]
        idx = np.empty(self.m, dtype=int)
        phase1_cost = np.zeros(self.width)
        needs_phase1 = False
        for i in range(self.m):
            art = self.real + i
            if i >= self.m_eq and resid[i] >= 0.0:
                idx[i] = self.n + (i - self.m_eq)  # slack starts basic
                continue
            idx[i] = art
            if abs(resid[i]) > tols.feasibility:
                needs_phase1 = True
            if resid[i] >= 0.0:
                hi[art] = np.inf
                phase1_cost[art] = 1.0
            else:
                lo[art], hi[art] = -np.inf, 0.0
                phase1_cost[art] = -1.0
        basis = _Basis(self.a, idx, self.real)
        x_b = self._compute_xb(basis, vals)
        budget = [0]
        if needs_phase1:
            status = self._primal(phase1_cost, basis, vals, at_upper, lo, hi,
                                  x_b, tols, max_iter, budget)
            if status != "optimal":
                return LpResult(status="iteration_limit", iterations=budget[0]), None
            infeas = float(phase1_cost[basis.idx] @ x_b)
            if infeas > 1e-7:
                return LpResult(status="infeasible", iterations=budget[0]), None
        # pin the artificials; pivot basic leftovers out where a stored
        # column is available, otherwise they idle at zero
        lo[self.real:] = 0.0
        hi[self.real:] = 0.0
        vals[self.real:] = 0.0
        for row in range(self.m):
            if basis.idx[row] >= self.real:
                tableau_row = basis.inv[row] @ self.a
                pivots = np.where(np.abs(tableau_row) > 1e-9)[0]
                if pivots.size:
                    basis.replace(row, int(pivots[0]))
        x_b = self._compute_xb(basis, vals)
        status = self._primal(self._phase2_costs(), basis, vals, at_upper,
                              lo, hi, x_b, tols, max_iter, budget)
        if status == "iteration_limit":
            return LpResult(status="iteration_limit", iterations=budget[0]), None
        if status == "unbounded":
            return LpResult(status="unbounded", iterations=budget[0]), None
        return self._finish(basis, vals, at_upper, x_b, budget[0])

    def _solve_warm(self, warm: BasisState, lo: np.ndarray, hi: np.ndarray,
                    tols: Tolerances,
                    max_iter: int) -> tuple[LpResult, BasisState | None] | None:
        live = self._live
        if live is not None and np.array_equal(live[0].idx, warm.idx):
            # the requested basis is the one already factorized; continue
            # in place without rebuilding the inverse
            basis, at_upper = live[0], warm.at_upper.copy()
        else:
            try:
                basis = _Basis(self.a, warm.idx.copy(), self.real)
            except np.linalg.LinAlgError:
                return None
            at_upper = warm.at_upper.copy()
        # re-anchor every nonbasic variable on a finite bound, keeping the
        # inherited side wherever the new bounds still allow it
        at_upper[lo == hi] = False
        at_upper[at_upper & ~np.isfinite(hi)] = False
        at_upper[~at_upper & ~np.isfinite(lo) & np.isfinite(hi)] = True
        vals = np.where(at_upper, hi, lo)
        vals[~np.isfinite(vals)] = 0.0
        x_b = self._compute_xb(basis, vals)
        budget = [0]
        status = self._dual(basis, vals, at_upper, lo, hi, x_b, tols,
                            max_iter, budget)
        if status == "infeasible":
            self._live = (basis, at_upper)
            return LpResult(status="infeasible", iterations=budget[0]), None
        if status == "iteration_limit":
            return None
        status = self._primal(self._phase2_costs(), basis, vals, at_upper,
                              lo, hi, x_b, tols, max_iter, budget)
        if status == "iteration_limit":
            return None
        if status == "unbounded":
            return LpResult(status="unbounded", iterations=budget[0]), None
        return self._finish(basis, vals, at_upper, x_b, budget[0])


def solve_lp(problem: LinearProgram, tols: Tolerances = DEFAULT_TOLS,
             max_iter: int = 20000) -> LpResult:
    """Solve a general-form linear program with the revised simplex method.

    Args:
        problem: the program to solve.
        tols: numeric thresholds; defaults to the package-wide record.
        max_iter: hard iteration cap across phases.

    Returns:
        An :class:`LpResult`. Duals follow sensitivity convention in the
        problem's own orientation, so for a maximization a binding ``<=``
        row has a nonnegative ``dual_ub`` entry.
    """
    res, _ = SimplexEngine(problem).solve(tols=tols, max_iter=max_iter)
    return res
