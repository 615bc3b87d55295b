"""HTTP front for elicitation sessions and robust portfolio solves.

Sessions live as JSON files, one per id, with the answered comparisons as
the source of truth; every request folds the file back into a live
session, so the polyhedron can never drift from the record. Per-session
work is serialized by an in-process lock and portfolio solves run on a
small dedicated pool, keeping long mixed-integer solves from starving the
interactive endpoints.
"""
from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .elicit import (
    ORACLES,
    Session,
    SessionConfig,
    next_query,
    start_session,
    submit_answer,
)
from .csvio import read_scenarios_file
from .polyhedron import analytic_center, utility_band
from .pro import (
    ConservatismConfig,
    ProInstance,
    solve_pro_classic,
    solve_pro_conservative,
)
from .querygen import AllDegenerate

_STATUS_OF = {"not_found": 404, "conflict": 409, "invalid": 400, "converged": 409}


class ApiError(Exception):
    """Machine-readable service error; codes are stable across versions."""

    def __init__(self, code: str, message: str) -> None:
        if code not in _STATUS_OF:
            raise ValueError(f"unknown error code {code!r}")
        super().__init__(message)
        self.code = code
        self.message = message


class SessionStore:
    """Directory of session files, one JSON document per session id.

    Saves go through a temporary file and an atomic rename, so a reader
    never observes a half-written session.
    """

    def __init__(self, directory: str | Path) -> None:
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def path(self, session_id: str) -> Path:
        if not session_id.replace("-", "").isalnum():
            raise ApiError("invalid", f"malformed session id {session_id!r}")
        return self.directory / f"{session_id}.json"

    def save(self, session: Session) -> None:
        target = self.path(session.id)
        tmp = target.with_suffix(".json.tmp")
        tmp.write_text(session.to_json(), encoding="utf-8")
        tmp.replace(target)

    def load(self, session_id: str) -> Session:
        target = self.path(session_id)
        if not target.exists():
            raise ApiError("not_found", f"no session {session_id}")
        return Session.from_json(target.read_text(encoding="utf-8"))

    def list_ids(self) -> list[str]:
        return sorted(p.stem for p in self.directory.glob("*.json"))


class _LockMap:
    def __init__(self) -> None:
        self._locks: dict[str, threading.Lock] = {}
        self._guard = threading.Lock()

    def for_id(self, session_id: str) -> threading.Lock:
        with self._guard:
            return self._locks.setdefault(session_id, threading.Lock())


def _fmt_amount(x: float, decimals: int) -> str:
    return f"{x:+.{decimals}f}"


def render_query(session: Session) -> dict:
    """Pending comparison as two lotteries, amounts and percentages ready
    to display. The two probabilities always print to a 100% total."""
    rec = session.pending
    if rec is None:
        raise ApiError("conflict", "no pending query")
    dec = session.grid.rounding_decimals
    pct3 = round(100.0 * rec.p, 1)
    pct1 = round(100.0 - pct3, 1)
    r1s, r2s, r3s = (_fmt_amount(r, dec) for r in (rec.r1, rec.r2, rec.r3))
    return {
        "index": len(session.records) - 1,
        "a": {
            "outcomes": [
                {"amount": rec.r1, "probability_pct": pct1},
                {"amount": rec.r3, "probability_pct": pct3},
            ],
            "text": f"A pays {r1s} with {pct1}% chance and {r3s} with {pct3}% chance",
        },
        "b": {
            "amount": rec.r2,
            "text": f"B pays {r2s} for sure",
        },
    }


def band_payload(session: Session) -> dict:
    """Per-breakpoint utility envelope plus the center estimate's curve."""
    band = utility_band(session.polyhedron, session.grid)
    lifted = analytic_center(session.polyhedron).lifted
    center = np.concatenate([[0.0], np.cumsum(lifted)])
    return {
        "breakpoints": [float(x) for x in session.grid.points],
        "lower": [lo for lo, _ in band],
        "upper": [hi for _, hi in band],
        "center": [float(u) for u in center],
    }


def session_summary(session: Session) -> dict:
    pending = session.pending
    return {
        "id": session.id,
        "mode": session.mode,
        "grid": [float(x) for x in session.grid.points],
        "n_queries": session.answered_count,
        "pending": None if pending is None else render_query(session),
        "band": band_payload(session),
        "metrics": session.metrics,
        "converged": session.converged,
    }


class CreateSessionBody(BaseModel):
    range: tuple[float, float]
    grid: list[float] | None = None
    config: dict | None = None
    mode: str = "interactive"
    oracle: str | None = None


class AnswerBody(BaseModel):
    choice: str


class ProSolveBody(BaseModel):
    session_id: str
    scenarios_csv_ref: str
    scheme: str = "classic"
    parameter: float | None = None


def _config_from(data: dict | None) -> SessionConfig:
    base = SessionConfig().to_dict()
    extra = set(data or ()) - set(base)
    if extra:
        raise ApiError("invalid", f"unknown config keys: {sorted(extra)}")
    base.update(data or {})
    try:
        return SessionConfig.from_dict(base)
    except (TypeError, ValueError) as exc:
        raise ApiError("invalid", f"bad config: {exc}") from exc


def _solve_instance(inst: ProInstance, scheme: str, parameter: float | None):
    if scheme == "classic":
        return solve_pro_classic(inst)
    if scheme == "none":
        cfg = ConservatismConfig(scheme="none")
    elif scheme == "budget":
        if parameter is None:
            raise ApiError("invalid", "budget scheme needs a parameter")
        cfg = ConservatismConfig(scheme="budget", budget=float(parameter))
    elif scheme == "gamma":
        if parameter is None:
            raise ApiError("invalid", "gamma scheme needs a parameter")
        cfg = ConservatismConfig(scheme="gamma", gamma=float(parameter))
    else:
        raise ApiError("invalid", f"unknown scheme {scheme!r}")
    return solve_pro_conservative(inst, cfg)


def create_app(store_dir: str | Path, solver_workers: int = 2) -> FastAPI:
    """Build the service over a session directory.

    The app object owns no session state beyond the per-id locks; kill it
    and restart on the same directory and every session resumes exactly
    where its file says it was.
    """
    store = SessionStore(store_dir)
    locks = _LockMap()
    pool = ThreadPoolExecutor(max_workers=solver_workers)
    app = FastAPI(title="prefelicit service")
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])

    @app.exception_handler(ApiError)
    async def _api_error(_: Request, exc: ApiError) -> JSONResponse:
        return JSONResponse(status_code=_STATUS_OF[exc.code],
                            content={"error": {"code": exc.code,
                                               "message": exc.message}})

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionBody) -> dict:
        lo, hi = body.range
        config = _config_from(body.config)
        oracle = body.oracle
        if body.mode == "simulated":
            oracle = oracle or "exp10"
            if oracle not in ORACLES:
                raise ApiError("invalid", f"unknown oracle {oracle!r}")
        try:
            session = start_session(
                float(lo), float(hi), mode=body.mode, config=config,
                grid_points=tuple(body.grid) if body.grid is not None else None,
                oracle=oracle,
            )
        except ValueError as exc:
            raise ApiError("invalid", str(exc)) from exc
        store.save(session)
        return {"id": session.id, "grid": [float(x) for x in session.grid.points]}

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str) -> dict:
        with locks.for_id(session_id):
            return session_summary(store.load(session_id))

    @app.post("/sessions/{session_id}/query")
    def post_query(session_id: str) -> dict:
        with locks.for_id(session_id):
            session = store.load(session_id)
            if session.pending is not None:
                return render_query(session)
            if session.converged:
                raise ApiError("converged", "the session has converged")
            try:
                next_query(session)
            except AllDegenerate:
                store.save(session)
                raise ApiError("converged",
                               "every candidate comparison is degenerate") from None
            store.save(session)
            return render_query(session)

    @app.post("/sessions/{session_id}/answer")
    def post_answer(session_id: str, body: AnswerBody) -> dict:
        choice = body.choice.strip().upper()
        if choice not in ("A", "B"):
            raise ApiError("invalid", "choice must be 'A' or 'B'")
        with locks.for_id(session_id):
            session = store.load(session_id)
            if session.pending is None:
                raise ApiError("conflict", "no pending query to answer")
            submit_answer(session, -1 if choice == "A" else 1)
            store.save(session)
            return session_summary(session)

    @app.get("/sessions/{session_id}/band")
    def get_band(session_id: str) -> dict:
        with locks.for_id(session_id):
            return band_payload(store.load(session_id))

    @app.post("/pro/solve")
    def pro_solve(body: ProSolveBody) -> dict:
        with locks.for_id(body.session_id):
            session = store.load(body.session_id)
        try:
            tickers, scenarios = read_scenarios_file(body.scenarios_csv_ref)
        except OSError as exc:
            raise ApiError("invalid", f"cannot read scenario file: {exc}") from exc
        except ValueError as exc:
            raise ApiError("invalid", f"bad scenario file: {exc}") from exc
        try:
            inst = ProInstance(grid=session.grid, polyhedron=session.polyhedron,
                               scenarios=scenarios, tickers=tickers)
        except ValueError as exc:
            raise ApiError("invalid", str(exc)) from exc
        try:
            z, value, _ = pool.submit(
                _solve_instance, inst, body.scheme, body.parameter).result()
        except (ApiError, ValueError) as exc:
            if isinstance(exc, ApiError):
                raise
            raise ApiError("invalid", str(exc)) from exc
        return {
            "value": float(value),
            "z": [float(t) for t in z],
            "tickers": list(tickers),
            "scheme": body.scheme,
            "parameter": body.parameter,
        }

    return app


def serve(port: int, store_dir: str | Path, host: str = "127.0.0.1") -> None:
    """Run the service under uvicorn until interrupted."""
    import uvicorn

    uvicorn.run(create_app(store_dir), host=host, port=port)
