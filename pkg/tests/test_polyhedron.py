"""Geometry of the answer polyhedron: center, axis, bands, radii."""
from __future__ import annotations

import math

import numpy as np
import pytest

from oracle_helpers import enumerate_vertices, jacobi_min_eigenpair
from prefelicit.polyhedron import (
    AnalyticCenter,
    EmptyInterior,
    Polyhedron,
    analytic_center,
    longest_axis_endpoints,
    radius_metrics,
    utility_band,
)
from prefelicit.pwl import BreakpointGrid, true_increments


def test_initial_center_is_simplex_midpoint() -> None:
    ac = analytic_center(Polyhedron.initial(2))
    assert ac.c == pytest.approx([1 / 3, 1 / 3], abs=1e-9)
    assert ac.lifted == pytest.approx([1 / 3, 1 / 3, 1 / 3], abs=1e-9)
    for dim in (1, 3, 5, 8):
        ac = analytic_center(Polyhedron.initial(dim))
        assert ac.c == pytest.approx(np.full(dim, 1 / (dim + 1)), abs=1e-9)


def test_center_satisfies_first_order_conditions() -> None:
    # Independent optimality check: the slack-weighted row sum vanishes.
    p = Polyhedron.initial(3)
    p = p.add_cut(np.array([0.3, -0.2, 0.1, -0.2]), +1)
    p = p.add_cut(np.array([-0.1, 0.4, -0.3, 0.0]), -1)
    ac = analytic_center(p)
    a, b = p.rows()
    s = b - a @ ac.c
    assert np.all(s > 0)
    residual = a.T @ (1.0 / s)
    assert np.linalg.norm(residual) <= 1e-6
    # Determinism: same polyhedron, same center bit for bit.
    again = analytic_center(p)
    assert np.array_equal(again.c, ac.c)


def test_center_after_balance_cut_matches_closed_form() -> None:
    # With the single cut v2 <= v1 the stationarity system reduces to
    # (v1 - v2)^2 = 2 v1 v2 and v1 + v2 = 3/4, giving the values below.
    p = Polyhedron.initial(2).add_cut(np.array([-0.39, 0.39, 0.0]), +1)
    ac = analytic_center(p)
    s_sum, diff = 0.75, 0.75 / math.sqrt(3)
    assert ac.c == pytest.approx([(s_sum + diff) / 2, (s_sum - diff) / 2], abs=1e-9)
    assert ac.c == pytest.approx([0.59, 0.16], abs=0.01)


def test_cut_scaling_does_not_move_center() -> None:
    base = Polyhedron.initial(2)
    c_a = analytic_center(base.add_cut(np.array([-0.39, 0.39, 0.0]), +1)).c
    c_b = analytic_center(base.add_cut(np.array([-3.9, 3.9, 0.0]), +1)).c
    assert c_a == pytest.approx(c_b, abs=1e-9)


def test_empty_interior_detected() -> None:
    p = Polyhedron.initial(2).add_cut(np.array([1.0, 0.0, 0.0]), +1)
    with pytest.raises(EmptyInterior):
        analytic_center(p)  # squeezed onto the face v1 = 0
    q = p.add_cut(np.array([-1.0, 0.5, 0.5]), +1)
    with pytest.raises(EmptyInterior):
        analytic_center(q)  # demands v1 >= 1/3 as well: infeasible


def test_add_cut_validation_and_dedup() -> None:
    p = Polyhedron.initial(2)
    with pytest.raises(ValueError):
        p.add_cut(np.zeros(3), +1)
    with pytest.raises(ValueError):
        p.add_cut(np.array([1.0, 0.0]), +1)
    with pytest.raises(ValueError):
        p.add_cut(np.array([1.0, 0.0, 0.0]), 2)
    p1 = p.add_cut(np.array([-0.39, 0.39, 0.0]), +1)
    assert len(p1.cuts) == 1
    # Positive rescaling of an existing cut is redundant and skipped.
    assert p1.add_cut(np.array([-0.975, 0.975, 0.0]), +1) is p1
    # The opposite answer is a genuinely different half-space.
    p2 = p1.add_cut(np.array([-0.39, 0.39, 0.0]), -1)
    assert len(p2.cuts) == 2


def test_simplex_axis_endpoints() -> None:
    p = Polyhedron.initial(2)
    ac = analytic_center(p)
    axis = longest_axis_endpoints(p, ac)
    assert axis.v1 == pytest.approx([2 / 3, 0.0], abs=1e-9)
    assert axis.v2 == pytest.approx([0.0, 2 / 3], abs=1e-9)


def test_axis_against_independent_eigen_route() -> None:
    # Reconstruct the axis with the rotation-based eigensolver and a
    # plain loop ray trace; both routes must land on the same endpoints.
    p = Polyhedron.initial(2).add_cut(np.array([-0.39, 0.39, 0.0]), +1)
    ac = analytic_center(p)
    axis = longest_axis_endpoints(p, ac)

    a, b = p.rows()
    s = b - a @ ac.c
    h_ref = sum(np.outer(a[i], a[i]) / s[i] ** 2 for i in range(a.shape[0]))
    _, u_ref = jacobi_min_eigenpair(h_ref)

    def trace(direction: np.ndarray) -> np.ndarray:
        t_best = math.inf
        for i in range(a.shape[0]):
            along = float(a[i] @ direction)
            if along > 1e-14:
                t_best = min(t_best, s[i] / along)
        return ac.c + t_best * direction

    assert axis.h == pytest.approx(h_ref, rel=1e-9)
    assert axis.v1 == pytest.approx(trace(u_ref), abs=1e-8)
    assert axis.v2 == pytest.approx(trace(-u_ref), abs=1e-8)
    assert axis.v1 == pytest.approx([0.9330, 0.0670], abs=1e-3)
    assert axis.v2 == pytest.approx([0.25, 0.25], abs=1e-3)


def test_axis_endpoints_lie_on_boundary() -> None:
    p = Polyhedron.initial(3)
    p = p.add_cut(np.array([0.2, -0.1, 0.05, -0.15]), +1)
    p = p.add_cut(np.array([-0.3, 0.1, 0.1, 0.1]), -1)
    ac = analytic_center(p)
    axis = longest_axis_endpoints(p, ac)
    a, b = p.rows()
    for v in (axis.v1, axis.v2):
        slack = b - a @ v
        assert np.all(slack >= -1e-9)
        assert np.min(slack) <= 1e-9


def test_axis_on_synthetic_box_follows_long_side() -> None:
    # A synthetic 2 x 1 box: the flat barrier direction is the long side.
    a_box = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
    b_box = np.array([2.0, 0.0, 1.0, 0.0])

    class _Box(Polyhedron):
        def rows(self):  # type: ignore[override]
            return a_box, b_box

    box = _Box(dim=2)
    ac = analytic_center(box)
    assert ac.c == pytest.approx([1.0, 0.5], abs=1e-9)
    axis = longest_axis_endpoints(box, ac)
    assert abs(axis.v1[0] - axis.v2[0]) == pytest.approx(2.0, abs=1e-8)
    assert abs(axis.v1[1] - axis.v2[1]) <= 1e-8


def test_inner_ellipsoid_contained_by_sampling() -> None:
    rng = np.random.default_rng(4)
    p = Polyhedron.initial(4)
    p = p.add_cut(np.array([0.25, -0.05, 0.0, -0.1, -0.1]), +1)
    p = p.add_cut(np.array([-0.2, 0.3, -0.1, 0.0, 0.0]), -1)
    ac = analytic_center(p)
    a, b = p.rows()
    s = b - a @ ac.c
    h = (a / (s ** 2)[:, None]).T @ a
    root = np.linalg.cholesky(np.linalg.inv(h))
    for _ in range(100):
        d = rng.normal(size=4)
        d /= np.linalg.norm(d)
        point = ac.c + root @ d * rng.uniform(0.0, 1.0)
        assert np.all(a @ point <= b + 1e-9)


def test_band_on_initial_simplex_is_unit_interval() -> None:
    grid = BreakpointGrid(points=(-0.5, 0.0, 0.25, 0.5))
    band = utility_band(Polyhedron.initial(2), grid)
    assert band[0] == (0.0, 0.0)
    assert band[-1] == (1.0, 1.0)
    for lo, hi in band[1:-1]:
        assert lo == pytest.approx(0.0, abs=1e-8)
        assert hi == pytest.approx(1.0, abs=1e-8)


def test_band_matches_vertex_enumeration() -> None:
    grid = BreakpointGrid(points=(-0.5, 0.0, 0.25, 0.5))
    p = Polyhedron.initial(2).add_cut(np.array([-0.39, 0.39, 0.0]), +1)
    a, b = p.rows()
    verts = enumerate_vertices(a, b)
    assert len(verts) >= 3
    band = utility_band(p, grid)
    from prefelicit.pwl import g_of_x, lift
    for i, x in enumerate(grid.points):
        g = g_of_x(grid, float(x))
        vals = [float(lift(v) @ g) for v in verts]
        assert band[i][0] == pytest.approx(min(vals), abs=1e-7)
        assert band[i][1] == pytest.approx(max(vals), abs=1e-7)


def test_band_grid_mismatch_rejected() -> None:
    grid = BreakpointGrid(points=(-0.5, 0.0, 0.25, 0.5))
    with pytest.raises(ValueError):
        utility_band(Polyhedron.initial(3), grid)


def test_radius_metrics_on_initial_simplex() -> None:
    grid = BreakpointGrid(points=(-0.5, -0.48, 0.0, 0.5))
    v_star = true_increments(lambda t: 1.0 - math.exp(-10.0 * t), grid).lifted
    metrics = radius_metrics(Polyhedron.initial(2), grid, v_star=v_star)
    # Hand value: centers of partial sums are 1/3 and 2/3; the reference
    # partial sums are 0.18128 and 0.99331, so the gap peaks at 0.32664.
    expected = max(abs(1 / 3 - v_star[0]), abs(2 / 3 - v_star[0] - v_star[1]))
    assert metrics["d_ac"] == pytest.approx(expected, abs=1e-9)
    assert metrics["d_ac"] == pytest.approx(0.3266, abs=2e-4)
    assert metrics["d_r1"] == pytest.approx(2 / 3, abs=1e-8)
    assert metrics["d_r2"] == pytest.approx(1.0, abs=1e-8)


def test_radius_metrics_optional_parts() -> None:
    grid = BreakpointGrid(points=(-0.5, 0.0, 0.5))
    metrics = radius_metrics(Polyhedron.initial(1), grid, include_band=False)
    assert metrics["d_ac"] is None
    assert metrics["d_r2"] is None
    assert metrics["d_r1"] == pytest.approx(1.0, abs=1e-8)


def test_contains_and_serialization_round_trip() -> None:
    p = Polyhedron.initial(2).add_cut(np.array([-0.39, 0.39, 0.0]), +1)
    assert p.contains(np.array([0.5, 0.2]))
    assert not p.contains(np.array([0.2, 0.5]))
    back = Polyhedron.from_dict(p.to_dict())
    assert back == p


def test_reduced_rows_carry_offsets() -> None:
    # Eliminating the implicit last increment moves its coefficient to
    # the right-hand side: the second recorded comparison of the worked
    # normal below demands v1 >= 0.2 / 0.34.
    p = Polyhedron.initial(2).add_cut(np.array([0.14, -0.2, -0.2]), -1)
    a, b = p.rows()
    assert a[-1] == pytest.approx([-0.34, 0.0], abs=1e-12)
    assert b[-1] == pytest.approx(-0.2, abs=1e-12)
    ac = analytic_center(p)
    assert ac.c[0] >= 0.2 / 0.34 - 1e-9


def test_value_range_between_breakpoints() -> None:
    from prefelicit.polyhedron import value_range

    grid = BreakpointGrid(points=(0.0, 0.25, 0.5, 0.75, 1.0))
    p = Polyhedron.initial(3)
    # Matches the per-breakpoint band where the point is a breakpoint.
    band = utility_band(p, grid)
    for i, x in enumerate(grid.points):
        lo, hi = value_range(p, grid, float(x))
        assert (lo, hi) == pytest.approx(band[i], abs=1e-9)
    # With no cuts, a point a fraction f into the first interval can
    # reach anything in [0, f]; in a middle interval, anything in [0, 1];
    # a fraction f into the last interval, anything in [f, 1].
    lo, hi = value_range(p, grid, 0.1)
    assert (lo, hi) == pytest.approx((0.0, 0.4), abs=1e-7)
    lo, hi = value_range(p, grid, 0.6)
    assert (lo, hi) == pytest.approx((0.0, 1.0), abs=1e-7)
    lo, hi = value_range(p, grid, 0.95)
    assert (lo, hi) == pytest.approx((0.8, 1.0), abs=1e-7)
