"""Branch-and-bound solver for mixed problems with binary variables.

Node relaxations share one simplex engine and differ only in variable
bounds, so each child is solved by dual-simplex repair of its parent's
basis rather than from scratch. Branching prefers selector groups (sets
of binaries that must sum to one) over single binaries: the group's
remaining support is split in half, which fixes many variables per node
and keeps trees shallow on interval-selection encodings. Ties choose the
lowest index so runs are deterministic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .simplex import BasisState, LinearProgram, SimplexEngine
from .tolerances import DEFAULT_TOLS, Tolerances

_INT_TOL = 1e-6


@dataclass
class MixedIntegerProgram:
    """A linear program plus binary restrictions.

    Attributes:
        lp: the continuous relaxation skeleton; bounds for binary columns
            are forced into [0, 1] automatically.
        binary: indices of variables restricted to {0, 1}.
        sos1_groups: optional list of index groups, each a set of binaries
            expected to sum to one; used to guide branching.
        implied_zero: optional map from a binary index to companion
            variables that the model forces to zero whenever that binary
            is zero; branching applies the fixings directly so node
            relaxations shrink instead of carrying dead columns.
    """

    lp: LinearProgram
    binary: list[int] = field(default_factory=list)
    sos1_groups: list[list[int]] = field(default_factory=list)
    implied_zero: dict[int, list[int]] = field(default_factory=dict)


@dataclass
class MilpResult:
    status: str  # optimal | infeasible | unbounded | node_limit
    value: float | None = None
    x: np.ndarray | None = None
    nodes: int = 0


def _clamped_bounds(mip: MixedIntegerProgram) -> tuple[np.ndarray, np.ndarray]:
    n = np.asarray(mip.lp.objective).size
    lower = np.zeros(n) if mip.lp.lower is None else np.array(mip.lp.lower, dtype=float)
    upper = np.full(n, np.inf) if mip.lp.upper is None else np.array(mip.lp.upper, dtype=float)
    for j in mip.binary:
        lower[j] = max(lower[j], 0.0)
        upper[j] = min(upper[j], 1.0)
    return lower, upper


def _fractionality(x: np.ndarray, idx: list[int]) -> float:
    if not idx:
        return 0.0
    vals = x[idx]
    return float(np.max(np.abs(vals - np.round(vals))))


def _pick_branch(mip: MixedIntegerProgram, x: np.ndarray) -> tuple[str, object] | None:
    best: tuple[str, object] | None = None
    best_score = -1.0
    for g, group in enumerate(mip.sos1_groups):
        fractional = [j for j in group if _frac(x[j])]
        if len(fractional) >= 2:
            score = 1.0 - max(float(x[j]) for j in group)
            if score > best_score + 1e-12:
                best, best_score = ("group", g), score
    if best is not None:
        return best
    for j in mip.binary:
        if _frac(x[j]):
            return "var", j
    return None


def _frac(v: float) -> bool:
    return abs(v - round(v)) > _INT_TOL


def solve_milp(mip: MixedIntegerProgram, tols: Tolerances = DEFAULT_TOLS,
               max_nodes: int = 50000, warm_x: np.ndarray | None = None,
               warm_value: float | None = None,
               engine: SimplexEngine | None = None) -> MilpResult:
    """Solve a binary mixed-integer program by depth-first branch and bound.

    An incumbent is kept as soon as a relaxation comes back integral;
    nodes whose bound cannot beat the incumbent by more than ``tols.gap``
    are pruned. A caller-supplied feasible point (``warm_x`` with its
    objective ``warm_value``) primes the incumbent so pruning starts at
    the root; it is trusted, not re-checked. Exhausting ``max_nodes``
    yields status ``node_limit`` so callers can distinguish a proven
    optimum from a truncated search.

    Node relaxations differ only in variable bounds, so one
    :class:`SimplexEngine` serves the whole tree and every child starts
    from its parent's basis via the dual simplex. Callers that already
    built an engine for the same matrix can pass it in.
    """
    sense = 1.0 if mip.lp.maximize else -1.0
    lower0, upper0 = _clamped_bounds(mip)
    if engine is None:
        engine = SimplexEngine(mip.lp)
    best_value = -math.inf
    best_x: np.ndarray | None = None
    if warm_x is not None and warm_value is not None:
        best_value = sense * float(warm_value)
        best_x = np.array(warm_x, dtype=float)
        for j in mip.binary:
            best_x[j] = round(best_x[j])
    nodes = 0
    saw_unbounded = False

    def fix_zero(lo: np.ndarray, up: np.ndarray, j: int) -> None:
        lo[j] = up[j] = 0.0
        for t in mip.implied_zero.get(j, ()):
            lo[t] = up[t] = 0.0

    stack: list[tuple[np.ndarray, np.ndarray, BasisState | None]] = [
        (lower0, upper0, None)]
    while stack and nodes < max_nodes:
        lower, upper, parent = stack.pop()
        nodes += 1
        res, state = engine.solve(lower=lower, upper=upper, warm=parent,
                                  tols=tols)
        if res.status == "infeasible":
            continue
        if res.status == "unbounded":
            saw_unbounded = True
            continue
        if res.status != "optimal":
            continue
        bound = sense * res.value
        if bound <= best_value + tols.gap:
            continue
        assert res.x is not None
        choice = _pick_branch(mip, res.x)
        if choice is None:
            snapped = res.x.copy()
            for j in mip.binary:
                snapped[j] = round(snapped[j])
            if bound > best_value:
                best_value = bound
                best_x = snapped
            continue
        kind, target = choice
        if kind == "var":
            j = int(target)
            for fixed in (0.0, 1.0):  # the stack pops the last push first
                lo, up = lower.copy(), upper.copy()
                if fixed == 0.0:
                    fix_zero(lo, up, j)
                else:
                    lo[j] = up[j] = 1.0
                stack.append((lo, up, state))
        else:
            # dichotomy over the group's remaining support: each child
            # zeroes one half outright, so a group of size s is fully
            # decided after about log2(s) splits on any path
            group = mip.sos1_groups[int(target)]
            alive = [j for j in group if upper[j] > 0.5]
            half = len(alive) // 2
            left, right = alive[:half], alive[half:]
            mass_left = sum(float(res.x[j]) for j in left)
            mass_right = sum(float(res.x[j]) for j in right)
            # push the side holding most relaxation mass last so the
            # depth-first pop chases the likelier child first
            zero_order = (left, right) if mass_right >= mass_left else (right, left)
            for zero_side in zero_order:
                lo, up = lower.copy(), upper.copy()
                for j in zero_side:
                    fix_zero(lo, up, j)
                kept = [j for j in alive if j not in zero_side]
                if len(kept) == 1:
                    lo[kept[0]] = 1.0
                stack.append((lo, up, state))

    if nodes >= max_nodes and stack:
        return MilpResult(status="node_limit", value=None if best_x is None else best_value * sense,
                          x=best_x, nodes=nodes)
    if best_x is None:
        if saw_unbounded:
            return MilpResult(status="unbounded", nodes=nodes)
        return MilpResult(status="infeasible", nodes=nodes)
    return MilpResult(status="optimal", value=best_value * sense, x=best_x, nodes=nodes)
