"""Query construction: budget staircases, both solves, cuts, selection."""
from __future__ import annotations

import math

import numpy as np
import pytest

from prefelicit.polyhedron import Polyhedron, analytic_center, longest_axis_endpoints
from prefelicit.pwl import BreakpointGrid, g_of_x, lift
from prefelicit.querygen import (
    AllDegenerate,
    CutVector,
    QueryParams,
    budget_point,
    cut_vector,
    generate_query,
    solve_A,
    solve_B,
)

# Four breakpoints with a very short first interval; the concave
# reference utility 1 - exp(-10 x) changes fastest there.
STEEP = BreakpointGrid(points=(-0.5, -0.48, 0.0, 0.5))
THIRDS = np.array([1 / 3, 1 / 3, 1 / 3])


def test_budget_point_two_intervals() -> None:
    grid = BreakpointGrid(points=(0.0, 0.5, 1.0))
    d = budget_point(np.array([0.5, 0.5]), grid, 0.4)
    assert d == pytest.approx([0.8, 0.0], abs=0)


def test_budget_point_full_budget_and_middle() -> None:
    d = budget_point(THIRDS, STEEP, 1.0)
    assert d == pytest.approx([1.0, 1.0, 1.0], abs=0)
    d = budget_point(THIRDS, STEEP, 0.4)
    assert d == pytest.approx([1.0, 0.2, 0.0], abs=1e-12)


def test_budget_point_validation() -> None:
    with pytest.raises(ValueError):
        budget_point(THIRDS, STEEP, 0.0)
    with pytest.raises(ValueError):
        budget_point(THIRDS, STEEP, 1.2)
    with pytest.raises(ValueError):
        budget_point(np.array([0.5, 0.5, 0.5]), STEEP, 0.4)
    with pytest.raises(ValueError):
        budget_point(np.array([0.5, 0.5, 0.0]), STEEP, 0.4)


def test_sure_side_frozen_values() -> None:
    v1 = np.array([2 / 3, 0.0, 1 / 3])
    assert solve_B(v1, THIRDS, STEEP, 0.4) == pytest.approx(-0.384, abs=1e-12)
    assert solve_B(v1, THIRDS, STEEP, 1.0) == pytest.approx(0.5, abs=0)
    wide = BreakpointGrid(points=(-0.5, 0.0, 0.25, 0.5))
    assert solve_B(v1, THIRDS, wide, 0.3) == pytest.approx(-0.05, abs=1e-12)


def test_sure_side_exhausts_budget_optimally() -> None:
    # Any in-budget amount is weakly worse for every admissible weight.
    rng = np.random.default_rng(12)
    for _ in range(5):
        raw = rng.uniform(0.05, 1.0, size=3)
        c = raw / raw.sum()
        raw_v = rng.uniform(0.0, 1.0, size=3)
        v1 = raw_v / raw_v.sum()
        d = float(rng.uniform(0.1, 0.95))
        r2 = solve_B(v1, c, STEEP, d)
        assert c @ g_of_x(STEEP, r2) == pytest.approx(d, abs=1e-10)
        best = float(v1 @ g_of_x(STEEP, r2))
        for x in np.linspace(-0.5, 0.5, 1000):
            if c @ g_of_x(STEEP, float(x)) <= d + 1e-12:
                assert v1 @ g_of_x(STEEP, float(x)) <= best + 1e-9


def test_lottery_solve_steep_case() -> None:
    v2 = np.array([0.0, 2 / 3, 1 / 3])
    r1, r3, p = solve_A(v2, THIRDS, STEEP, 0.4)
    assert (r1, r3, p) == pytest.approx((-0.5, 0.0, 0.6), abs=1e-12)


def test_lottery_solve_after_first_cut() -> None:
    # Center and axis endpoint of the polyhedron cut along v2 <= v1,
    # from the closed form in the polyhedron tests.
    s_sum, diff = 0.75, 0.75 / math.sqrt(3)
    c = np.array([(s_sum + diff) / 2, (s_sum - diff) / 2, 0.25])
    v2 = np.array([0.25, 0.25, 0.5])
    r1, r3, p = solve_A(v2, c, STEEP, 0.2)
    assert (r1, r3, p) == pytest.approx((-0.5, 0.5, 0.2), abs=1e-9)


def test_lottery_solve_two_interval_case() -> None:
    grid = BreakpointGrid(points=(0.0, 0.5, 1.0))
    r1, r3, p = solve_A(np.array([0.0, 1.0]), np.array([0.5, 0.5]), grid, 0.4)
    assert (r1, r3, p) == pytest.approx((0.0, 1.0, 0.4), abs=1e-9)
    ga = (1 - p) * g_of_x(grid, r1) + p * g_of_x(grid, r3)
    assert ga == pytest.approx([0.4, 0.4], abs=1e-8)


def _staircase_value(weights: np.ndarray, grid: BreakpointGrid, x: np.ndarray) -> np.ndarray:
    """Vectorized weighted feature value, written independently."""
    pts = grid.array
    out = np.zeros_like(x, dtype=float)
    cum = np.concatenate([[0.0], np.cumsum(weights)])
    for k in range(grid.n - 1):
        inside = (x > pts[k]) & (x <= pts[k + 1])
        frac = (x[inside] - pts[k]) / (pts[k + 1] - pts[k])
        out[inside] = cum[k] + weights[k] * frac
    return out


def _staircase_inverse(weights: np.ndarray, grid: BreakpointGrid, value: float) -> float:
    pts = grid.array
    cum = np.concatenate([[0.0], np.cumsum(weights)])
    for k in range(grid.n - 1):
        if value <= cum[k + 1] + 1e-15:
            frac = (value - cum[k]) / weights[k]
            return float(pts[k] + np.clip(frac, 0.0, 1.0) * (pts[k + 1] - pts[k]))
    return float(pts[-1])


def _lottery_grid_search(nu: np.ndarray, c: np.ndarray, grid: BreakpointGrid,
                         d: float, step: float = 1e-3) -> float:
    """Dense search over (r1, p) with r3 solved from the exact budget."""
    best = -np.inf
    r1s = np.arange(grid.lo, grid.hi + step / 2, step)
    w_r1 = _staircase_value(c, grid, r1s)
    n_r1 = _staircase_value(nu, grid, r1s)
    for p in np.arange(0.05, 0.95 + 1e-12, step):
        w_r3 = (d - (1 - p) * w_r1) / p
        ok = (w_r3 >= w_r1 - 1e-12) & (w_r3 <= 1.0 + 1e-12)
        if not np.any(ok):
            continue
        for wv, nv in zip(w_r3[ok], n_r1[ok]):
            r3 = _staircase_inverse(c, grid, float(np.clip(wv, 0.0, 1.0)))
            val = (1 - p) * nv + p * float(_staircase_value(nu, grid, np.array([r3]))[0])
            if val > best:
                best = val
    return best


def test_lottery_solve_matches_grid_search() -> None:
    grid = BreakpointGrid(points=(0.0, 0.5, 1.0))
    nu = np.array([0.0, 1.0])
    c = np.array([0.5, 0.5])
    r1, r3, p = solve_A(nu, c, grid, 0.5)
    mine = (1 - p) * float(nu @ g_of_x(grid, r1)) + p * float(nu @ g_of_x(grid, r3))
    oracle = _lottery_grid_search(nu, c, grid, 0.5, step=2e-3)
    assert mine == pytest.approx(oracle, abs=1e-6)


def test_lottery_solve_never_below_grid_search() -> None:
    rng = np.random.default_rng(77)
    grid = BreakpointGrid(points=(-0.5, -0.1, 0.2, 0.5))
    for _ in range(4):
        raw = rng.uniform(0.1, 1.0, size=3)
        c = raw / raw.sum()
        raw_v = rng.uniform(0.0, 1.0, size=3)
        nu = raw_v / raw_v.sum()
        d = float(rng.uniform(0.15, 0.9))
        r1, r3, p = solve_A(nu, c, grid, d)
        assert c @ ((1 - p) * g_of_x(grid, r1) + p * g_of_x(grid, r3)) == pytest.approx(d, abs=1e-9)
        mine = (1 - p) * float(nu @ g_of_x(grid, r1)) + p * float(nu @ g_of_x(grid, r3))
        oracle = _lottery_grid_search(nu, c, grid, d, step=5e-3)
        assert mine >= oracle - 1e-6


def test_cut_vector_values() -> None:
    q = QueryParams(r1=-0.5, r2=-0.384, r3=0.0, p=0.6, D=0.4)
    cut = cut_vector(STEEP, q)
    assert cut.array == pytest.approx([-0.4, 0.4, 0.0], abs=1e-12)
    # Published rounding of the same numbers.
    assert cut.array == pytest.approx([-0.39, 0.39, 0.0], abs=0.015)
    same = QueryParams(r1=0.1, r2=0.1, r3=0.1, p=0.5, D=0.5)
    assert cut_vector(STEEP, same).norm == 0.0
    q2 = QueryParams(r1=-0.5, r2=-0.49323999, r3=0.5, p=0.2, D=0.2)
    cut2 = cut_vector(STEEP, q2)
    assert cut2.array[1:] == pytest.approx([0.2, 0.2], abs=1e-12)
    assert cut2.array[0] == pytest.approx(-0.1381, abs=2e-4)


def test_generate_query_on_symmetric_start() -> None:
    p = Polyhedron.initial(2)
    q, cut = generate_query(p, STEEP)
    # All informative budget levels give parallel cuts here, so the tie
    # falls to the largest cut, which is the third level.
    assert q.D == pytest.approx(0.3, abs=0)
    assert (q.r1, q.r2, q.r3) == pytest.approx((-0.5, -0.482, 0.0), abs=1e-12)
    assert q.p == pytest.approx(0.45, abs=1e-12)
    assert cut.array == pytest.approx([-0.45, 0.45, 0.0], abs=1e-12)


def test_generate_query_single_budget() -> None:
    q, cut = generate_query(Polyhedron.initial(2), STEEP, d_grid=(0.4,))
    assert (q.r1, q.r2, q.r3, q.p) == pytest.approx((-0.5, -0.384, 0.0, 0.6), abs=1e-12)
    assert cut.array == pytest.approx([-0.4, 0.4, 0.0], abs=1e-12)


def test_generate_query_degenerate_budgets_raise() -> None:
    p = Polyhedron.initial(2)
    # At full budget both sides collapse onto the top amount; at 0.7 the
    # budget staircase already attains the lottery optimum.
    with pytest.raises(AllDegenerate):
        generate_query(p, STEEP, d_grid=(1.0,))
    with pytest.raises(AllDegenerate):
        generate_query(p, STEEP, d_grid=(0.7, 0.8, 0.9, 1.0))


def test_generate_query_matches_independent_selection() -> None:
    rng = np.random.default_rng(2024)
    grid = BreakpointGrid(points=(-0.5, -0.2, 0.0, 0.2, 0.5))
    p = Polyhedron.initial(3)
    for _ in range(2):
        q, cut = generate_query(p, grid)
        p = p.add_cut(cut.array, int(rng.choice([-1, 1])))
    chosen, chosen_cut = generate_query(p, grid)

    ac = analytic_center(p)
    axis = longest_axis_endpoints(p, ac)
    phi = lift(axis.v1) - lift(axis.v2)
    ranked = []
    for s, d in enumerate([t / 10 for t in range(1, 11)]):
        r2 = solve_B(lift(axis.v1), ac.lifted, grid, d)
        r1, r3, pp = solve_A(lift(axis.v2), ac.lifted, grid, d)
        vec = (1 - pp) * g_of_x(grid, r1) + pp * g_of_x(grid, r3) - g_of_x(grid, r2)
        norm = float(np.linalg.norm(vec))
        if norm <= 1e-12:
            continue
        cos = abs(float(vec @ phi)) / (norm * float(np.linalg.norm(phi)))
        ranked.append((round(cos, 9), round(norm, 9), -s, d))
    best = max(ranked)
    assert chosen.D == pytest.approx(best[3], abs=0)
    assert chosen_cut.norm == pytest.approx(best[1], abs=1e-8)


def test_query_invariants_on_random_instances() -> None:
    rng = np.random.default_rng(31)
    for _ in range(25):
        n = int(rng.integers(3, 8))
        inner = np.sort(rng.uniform(-0.45, 0.45, size=n - 2))
        while inner.size and np.min(np.diff(np.concatenate([[-0.5], inner, [0.5]]))) < 0.02:
            inner = np.sort(rng.uniform(-0.45, 0.45, size=n - 2))
        grid = BreakpointGrid(points=tuple([-0.5] + list(inner) + [0.5]))
        p = Polyhedron.initial(n - 2)
        try:
            for _ in range(int(rng.integers(0, 3))):
                q, cut = generate_query(p, grid)
                p = p.add_cut(cut.array, int(rng.choice([-1, 1])))
            q, cut = generate_query(p, grid)
        except AllDegenerate:
            continue
        ac = analytic_center(p)
        c_l = ac.lifted
        ga = (1 - q.p) * g_of_x(grid, q.r1) + q.p * g_of_x(grid, q.r3)
        gb = g_of_x(grid, q.r2)
        assert q.r1 <= q.r2 + 1e-9
        assert q.r2 <= q.r3 + 1e-9
        assert float(c_l @ (ga - gb)) == pytest.approx(0.0, abs=1e-8)
        assert float(c_l @ ga) == pytest.approx(q.D, abs=1e-8)
        assert float(c_l @ gb) == pytest.approx(q.D, abs=1e-8)
        assert cut.array == pytest.approx(ga - gb, abs=1e-12)


def test_query_params_validation() -> None:
    with pytest.raises(ValueError):
        QueryParams(r1=0.5, r2=0.0, r3=0.6, p=0.5, D=0.4)
    with pytest.raises(ValueError):
        QueryParams(r1=0.0, r2=0.1, r3=0.2, p=1.0, D=0.4)
    cut = CutVector(lifted=(0.1, -0.1))
    assert cut.norm == pytest.approx(math.sqrt(0.02), abs=1e-15)
