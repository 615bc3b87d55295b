"""Adaptive elicitation sessions with flexible breakpoints.

A session alternates between generating a pairwise comparison and
folding the answer back into the ambiguity set. The amounts named in
each comparison are rounded for presentation, inserted into the
breakpoint grid, and every previous answer is re-expressed on the
refined grid before the new half-space is added. Keeping the raw
answered records as the source of truth makes that re-expression exact:
each cut is simply recomputed from its recorded amounts on whatever grid
is current.

Inserting the named amounts is what keeps the method sound when the true
utility has curvature between old breakpoints: after insertion, the
piecewise-linear interpolant agrees with the true utility at every
amount the answer involved, so the recorded inequality can never point
the wrong way. The simulation tests verify this containment property
directly.
"""
from __future__ import annotations

import json
import logging
import math
import time
import uuid
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .polyhedron import Polyhedron, radius_metrics, value_range
from .pwl import BreakpointGrid, true_increments
from .querygen import (
    AllDegenerate,
    DEFAULT_D_GRID,
    DEFAULT_P_BOUNDS,
    QueryParams,
    cut_vector,
    generate_query,
)

logger = logging.getLogger(__name__)

_DEGENERATE_CUT_TOL = 1e-12

Utility = Callable[[float], float]


def _twopiece(x: float) -> float:
    if x <= 0.0:
        return (math.exp(8.0 * x) - 1.0) / 4.0
    return (1.0 - math.exp(-3.0 * x)) / 3.0


ORACLES: dict[str, Utility] = {
    "exp10": lambda x: 1.0 - math.exp(-10.0 * x),
    "twopiece": _twopiece,
    "linear": lambda x: x,
}


@dataclass(frozen=True)
class SessionConfig:
    """Tunables for query generation, rounding, and metric cadence."""

    d_grid: tuple[float, ...] = DEFAULT_D_GRID
    p_bounds: tuple[float, float] = DEFAULT_P_BOUNDS
    rounding_decimals: int = 2
    dedup_tol: float = 0.005
    max_points: int = 101
    band_every: int = 0
    reference_points: int = 11

    def to_dict(self) -> dict:
        return {
            "d_grid": list(self.d_grid),
            "p_bounds": list(self.p_bounds),
            "rounding_decimals": self.rounding_decimals,
            "dedup_tol": self.dedup_tol,
            "max_points": self.max_points,
            "band_every": self.band_every,
            "reference_points": self.reference_points,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SessionConfig":
        return cls(
            d_grid=tuple(float(d) for d in data["d_grid"]),
            p_bounds=(float(data["p_bounds"][0]), float(data["p_bounds"][1])),
            rounding_decimals=int(data["rounding_decimals"]),
            dedup_tol=float(data["dedup_tol"]),
            max_points=int(data["max_points"]),
            band_every=int(data["band_every"]),
            reference_points=int(data["reference_points"]),
        )


@dataclass(frozen=True)
class QueryRecord:
    """One comparison: lottery (r1 w.p. 1-p, r3 w.p. p) against sure r2.

    ``answer`` is +1 when the sure amount is weakly preferred, -1 when
    the lottery is, and None while the comparison is still on the table.
    Amounts are stored already rounded; they are exactly what was shown.
    """

    r1: float
    r2: float
    r3: float
    p: float
    D: float
    answer: int | None = None
    asked_at: float = 0.0

    @property
    def answered(self) -> bool:
        return self.answer is not None

    @property
    def params(self) -> QueryParams:
        return QueryParams(r1=self.r1, r2=self.r2, r3=self.r3, p=self.p, D=self.D)

    def to_dict(self) -> dict:
        return {"r1": self.r1, "r2": self.r2, "r3": self.r3, "p": self.p,
                "D": self.D, "answer": self.answer, "asked_at": self.asked_at}

    @classmethod
    def from_dict(cls, data: dict) -> "QueryRecord":
        answer = data["answer"]
        return cls(r1=float(data["r1"]), r2=float(data["r2"]),
                   r3=float(data["r3"]), p=float(data["p"]), D=float(data["D"]),
                   answer=None if answer is None else int(answer),
                   asked_at=float(data.get("asked_at", 0.0)))


@dataclass
class Session:
    """Mutable elicitation state driven by one caller at a time."""

    id: str
    grid: BreakpointGrid
    mode: str
    oracle_name: str | None
    config: SessionConfig
    records: list[QueryRecord] = field(default_factory=list)
    polyhedron: Polyhedron = field(default=None)  # type: ignore[assignment]
    metrics: list[dict] = field(default_factory=list)
    converged: bool = False
    oracle: Utility | None = None

    def __post_init__(self) -> None:
        if self.polyhedron is None:
            self.polyhedron = Polyhedron.initial(self.grid.n - 2)

    @property
    def pending(self) -> QueryRecord | None:
        if self.records and not self.records[-1].answered:
            return self.records[-1]
        return None

    @property
    def answered_count(self) -> int:
        return sum(1 for r in self.records if r.answered)

    def to_json(self) -> str:
        return json.dumps({
            "id": self.id,
            "mode": self.mode,
            "oracle": self.oracle_name,
            "config": self.config.to_dict(),
            "grid": list(self.grid.points),
            "records": [r.to_dict() for r in self.records],
            "metrics": self.metrics,
            "converged": self.converged,
        }, indent=2)

    @classmethod
    def from_json(cls, text: str, oracle: Utility | None = None) -> "Session":
        data = json.loads(text)
        config = SessionConfig.from_dict(data["config"])
        grid = BreakpointGrid(points=tuple(float(t) for t in data["grid"]),
                              rounding_decimals=config.rounding_decimals)
        records = [QueryRecord.from_dict(r) for r in data["records"]]
        name = data.get("oracle")
        if oracle is None and name is not None:
            if name not in ORACLES:
                raise ValueError(f"unknown oracle {name!r}; pass the callable")
        s = cls(id=data["id"], grid=grid, mode=data["mode"], oracle_name=name,
                config=config, records=records,
                polyhedron=_rebuild_polyhedron(grid, records),
                metrics=list(data.get("metrics", [])),
                converged=bool(data.get("converged", False)),
                oracle=oracle if oracle is not None else ORACLES.get(name or ""))
        return s


def _rebuild_polyhedron(grid: BreakpointGrid,
                        records: list[QueryRecord]) -> Polyhedron:
    """Re-express every answered cut on the given grid from raw records."""
    poly = Polyhedron.initial(grid.n - 2)
    for rec in records:
        if not rec.answered:
            continue
        cut = cut_vector(grid, rec.params)
        poly = poly.add_cut(cut.array, rec.answer)
    return poly


def default_breakpoints(x_lo: float, x_hi: float) -> tuple[float, ...]:
    """Ends, midpoint, and the third-quarter point of the range."""
    return (x_lo, 0.5 * (x_lo + x_hi), 0.25 * x_lo + 0.75 * x_hi, x_hi)


def start_session(x_lo: float, x_hi: float, mode: str = "simulated",
                  config: SessionConfig | None = None,
                  grid_points: tuple[float, ...] | None = None,
                  oracle: str | Utility | None = "exp10") -> Session:
    """Create a fresh session over amounts in [x_lo, x_hi].

    The default grid has four breakpoints; pass ``grid_points`` to start
    from a different one. In simulated mode ``oracle`` names a built-in
    utility or supplies a callable answering machine; interactive
    sessions ignore it.
    """
    if not x_lo < x_hi:
        raise ValueError("amount range must satisfy x_lo < x_hi")
    if mode not in ("simulated", "interactive"):
        raise ValueError("mode must be 'simulated' or 'interactive'")
    config = config or SessionConfig()
    points = grid_points if grid_points is not None else default_breakpoints(x_lo, x_hi)
    grid = BreakpointGrid(points=tuple(float(t) for t in points),
                          rounding_decimals=config.rounding_decimals)
    if not (abs(grid.lo - x_lo) < 1e-12 and abs(grid.hi - x_hi) < 1e-12):
        raise ValueError("grid must span the amount range exactly")
    oracle_fn: Utility | None = None
    oracle_name: str | None = None
    if mode == "simulated":
        if isinstance(oracle, str):
            if oracle not in ORACLES:
                raise ValueError(f"unknown oracle {oracle!r}")
            oracle_name, oracle_fn = oracle, ORACLES[oracle]
        elif callable(oracle):
            oracle_name, oracle_fn = "custom", oracle
        else:
            raise ValueError("simulated mode needs an oracle")
    return Session(id=uuid.uuid4().hex, grid=grid, mode=mode,
                   oracle_name=oracle_name, config=config, oracle=oracle_fn)


def next_query(s: Session) -> QueryRecord:
    """Generate the next comparison and park it as the pending record.

    Raises AllDegenerate when every budget level collapses, which the
    session records as convergence.
    """
    if s.pending is not None:
        raise RuntimeError("a pending query already exists")
    try:
        q, _ = generate_query(s.polyhedron, s.grid,
                              d_grid=s.config.d_grid, p_bounds=s.config.p_bounds)
    except AllDegenerate:
        s.converged = True
        raise
    dec = s.config.rounding_decimals
    rec = QueryRecord(r1=round(q.r1, dec), r2=round(q.r2, dec),
                      r3=round(q.r3, dec), p=q.p, D=q.D,
                      asked_at=time.time())
    s.records.append(rec)
    return rec


def simulated_answer(u_star: Utility, q: QueryRecord | QueryParams) -> int:
    """Answer by expected utility: +1 for the sure amount, -1 for the lottery.

    Exact ties go to the sure amount.
    """
    diff = u_star(q.r2) - (1.0 - q.p) * u_star(q.r1) - q.p * u_star(q.r3)
    return -1 if diff < 0.0 else 1


def submit_answer(s: Session, h: int) -> Session:
    """Fold an answer into the session: refine the grid, re-cut, measure.

    The three amounts join the grid (subject to rounding, deduplication,
    and the grid size cap), all previous cuts are re-expressed on the
    refined grid from their raw records, and the new signed cut is
    appended. A comparison whose cut collapses to zero after rounding is
    logged and discarded without touching the state.
    """
    rec = s.pending
    if rec is None:
        raise RuntimeError("no pending query to answer")
    if h not in (-1, 1):
        raise ValueError("answer must be +1 or -1")

    grid = s.grid
    for r in (rec.r1, rec.r2, rec.r3):
        if grid.n >= s.config.max_points:
            logger.warning("grid at capacity (%d points); %.4f not inserted",
                           grid.n, r)
            continue
        grid = grid.with_point(r, dedup_tol=s.config.dedup_tol)

    cut = cut_vector(grid, rec.params)
    if cut.norm <= _DEGENERATE_CUT_TOL:
        logger.warning("cut degenerate after rounding; discarding query %s",
                       (rec.r1, rec.r2, rec.r3))
        s.records.pop()
        return s

    answered = replace(rec, answer=int(h))
    s.records[-1] = answered
    s.grid = grid
    s.polyhedron = _rebuild_polyhedron(grid, s.records)
    s.metrics.append(_snapshot(s))
    return s


def _snapshot(s: Session) -> dict:
    iteration = s.answered_count
    with_band = s.config.band_every > 0 and iteration % s.config.band_every == 0
    v_star = None
    if s.oracle is not None:
        v_star = true_increments(s.oracle, s.grid).free
    m = radius_metrics(s.polyhedron, s.grid,
                       v_star=np.asarray(v_star) if v_star is not None else None,
                       include_band=with_band)
    snap = {"iteration": iteration, "n_points": s.grid.n,
            "d_ac": m["d_ac"], "d_r1": m["d_r1"], "d_r2": m["d_r2"],
            "d_r2_ref": None}
    if with_band:
        snap["d_r2_ref"] = reference_band_width(s)
    return snap


def reference_band_width(s: Session, n_points: int | None = None) -> float:
    """Widest utility range over a fixed evenly spaced set of amounts.

    Measuring on a fixed set makes the width comparable across
    iterations even as the breakpoint grid grows, and it can only
    shrink as cuts accumulate.
    """
    k = n_points if n_points is not None else s.config.reference_points
    xs = np.linspace(s.grid.lo, s.grid.hi, k)
    width = 0.0
    for x in xs:
        lo, hi = value_range(s.polyhedron, s.grid, float(x))
        width = max(width, hi - lo)
    return width


def run(s: Session, m: int) -> Session:
    """Answer up to ``m`` further comparisons with the simulated oracle.

    Stops early, marking the session converged, when query generation
    collapses at every budget level or a generated comparison rounds to
    a degenerate cut (the state is unchanged then, so the same
    comparison would only recur).
    """
    if s.mode != "simulated" or s.oracle is None:
        raise RuntimeError("run requires a simulated session with an oracle")
    target = s.answered_count + m
    while s.answered_count < target:
        try:
            rec = next_query(s)
        except AllDegenerate:
            logger.info("session %s converged after %d answers",
                        s.id, s.answered_count)
            break
        before = s.answered_count
        submit_answer(s, simulated_answer(s.oracle, rec))
        if s.answered_count == before:
            s.converged = True
            logger.info("session %s stopped on a degenerate comparison "
                        "after %d answers", s.id, s.answered_count)
            break
    return s
