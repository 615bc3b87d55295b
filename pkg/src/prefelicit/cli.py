"""Command line driver: simulated runs, the HTTP service, portfolio solves,
and conservatism sweeps.

Simulated runs are deterministic end to end. The session id is derived
from the seed and configuration, and recorded timestamps are zeroed, so
the same invocation always produces byte-identical output files.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import replace
from pathlib import Path

import click

from .csvio import read_scenarios_file, sweep_to_json, write_sweep
from .elicit import ORACLES, Session, SessionConfig, run, start_session
from .pro import (
    ConservatismConfig,
    ProInstance,
    conservatism_sweep,
    solve_pro_classic,
    solve_pro_conservative,
)


class CliError(click.ClickException):
    """Validation failure: one-line reason, exit code 2."""

    exit_code = 2


def _deterministic_id(seed: int, utility: str, lo: float, hi: float,
                      config: SessionConfig) -> str:
    payload = json.dumps([seed, utility, lo, hi, config.to_dict()])
    return hashlib.sha256(payload.encode()).hexdigest()[:32]


def _load_session(path: str) -> Session:
    p = Path(path)
    if not p.exists():
        raise CliError(f"no session file at {path}")
    try:
        return Session.from_json(p.read_text(encoding="utf-8"))
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError(f"bad session file: {exc}") from exc


def _read_returns(path: str):
    try:
        return read_scenarios_file(path)
    except OSError as exc:
        raise CliError(f"cannot read returns file: {exc}") from exc
    except ValueError as exc:
        raise CliError(f"bad returns file: {exc}") from exc


def _build_instance(session: Session, tickers, scenarios) -> ProInstance:
    try:
        return ProInstance(grid=session.grid, polyhedron=session.polyhedron,
                           scenarios=scenarios, tickers=tickers)
    except ValueError as exc:
        raise CliError(str(exc)) from exc


def _parse_floats(text: str, flag: str) -> list[float]:
    try:
        values = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise CliError(f"{flag} expects comma-separated numbers") from exc
    if not values:
        raise CliError(f"{flag} lists no values")
    return values


def _metric_table(session: Session) -> str:
    header = (f"{'iter':>4}  {'points':>6}  {'d_ac':>10}  {'d_r1':>10}  "
              f"{'d_r2':>10}  {'d_r2_ref':>10}")
    lines = [header]

    def cell(value) -> str:
        return f"{value:>10.6f}" if value is not None else f"{'-':>10}"

    for m in session.metrics:
        lines.append(f"{m['iteration']:>4}  {m['n_points']:>6}  "
                     + "  ".join(cell(m.get(k))
                                 for k in ("d_ac", "d_r1", "d_r2", "d_r2_ref")))
    return "\n".join(lines)


@click.group()
def main() -> None:
    """Adaptive utility elicitation and preference-robust portfolios."""


@main.command()
@click.option("--utility", default="exp10", show_default=True,
              help="Simulated answering machine: " + ", ".join(sorted(ORACLES)))
@click.option("--M", "m", type=int, default=10, show_default=True,
              help="Number of comparisons to answer.")
@click.option("--seed", type=int, default=0, show_default=True,
              help="Determines the session id; runs are otherwise deterministic.")
@click.option("--range", "range_", nargs=2, type=float, default=(-0.5, 0.5),
              show_default=True, help="Outcome range as two numbers.")
@click.option("--band-every", type=int, default=0, show_default=True,
              help="Measure the reference band every k iterations (0 = never).")
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Write the finished session JSON here.")
def elicit(utility: str, m: int, seed: int, range_, band_every: int,
           out: str | None) -> None:
    """Run a simulated elicitation and print the progress metrics."""
    if utility not in ORACLES:
        raise CliError(f"unknown utility {utility!r}; pick from "
                       + ", ".join(sorted(ORACLES)))
    if m < 0:
        raise CliError("--M must be nonnegative")
    if band_every < 0:
        raise CliError("--band-every must be nonnegative")
    lo, hi = range_
    config = SessionConfig(band_every=band_every)
    try:
        session = start_session(lo, hi, mode="simulated", config=config,
                                oracle=utility)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    session.id = _deterministic_id(seed, utility, lo, hi, config)
    run(session, m)
    session.records = [replace(r, asked_at=0.0) for r in session.records]

    click.echo(_metric_table(session))
    click.echo(f"answered {session.answered_count} comparisons over "
               f"{session.grid.n} breakpoints"
               + ("; converged" if session.converged else ""))
    if out is not None:
        Path(out).write_text(session.to_json() + "\n", encoding="utf-8")
        click.echo(f"wrote {out}")


@main.command()
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--store", "store_dir", type=click.Path(file_okay=False),
              required=True, help="Directory holding session files.")
def serve(port: int, host: str, store_dir: str) -> None:
    """Serve the HTTP API over a session directory."""
    from .service import serve as run_service

    run_service(port=port, store_dir=store_dir, host=host)


def _solve_for_scheme(inst: ProInstance, scheme: str, param: float | None):
    if scheme == "classic":
        return solve_pro_classic(inst)
    if scheme in ("budget", "gamma") and param is None:
        raise CliError(f"--scheme {scheme} needs --param")
    try:
        if scheme == "none":
            config = ConservatismConfig(scheme="none")
        elif scheme == "budget":
            config = ConservatismConfig(scheme="budget", budget=param)
        else:
            config = ConservatismConfig(scheme="gamma", gamma=param)
        return solve_pro_conservative(inst, config)
    except ValueError as exc:
        raise CliError(str(exc)) from exc


@main.command()
@click.option("--session", "session_path", required=True,
              type=click.Path(dir_okay=False), help="Session JSON file.")
@click.option("--returns", "returns_path", required=True,
              type=click.Path(dir_okay=False), help="Scenario CSV file.")
@click.option("--scheme", default="classic", show_default=True,
              type=click.Choice(["classic", "none", "budget", "gamma"]))
@click.option("--param", type=float, default=None,
              help="Budget or gamma value, depending on --scheme.")
def pro(session_path: str, returns_path: str, scheme: str,
        param: float | None) -> None:
    """Pick the portfolio with the best worst-case average utility."""
    session = _load_session(session_path)
    tickers, scenarios = _read_returns(returns_path)
    inst = _build_instance(session, tickers, scenarios)
    z, value, cert = _solve_for_scheme(inst, scheme, param)
    click.echo(json.dumps({
        "value": value,
        "z": [float(t) for t in z],
        "tickers": list(tickers),
        "scheme": scheme,
        "param": param,
        "stationarity_residual": cert.stationarity_residual,
    }, indent=2))


@main.command()
@click.option("--returns", "returns_path", required=True,
              type=click.Path(dir_okay=False), help="Scenario CSV file.")
@click.option("--grid-gamma", "grid_gamma", default=None,
              help="Comma-separated gamma values to sweep.")
@click.option("--grid-budget", "grid_budget", default=None,
              help="Comma-separated budget values to sweep.")
@click.option("--grid-M", "grid_m", default="10,20,30,40", show_default=True,
              help="Comma-separated elicitation depths.")
@click.option("--utility", default="exp10", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--range", "range_", nargs=2, type=float, default=(-0.5, 0.5),
              show_default=True)
@click.option("--workers", type=int, default=1, show_default=True,
              help="Parallel solves per sweep.")
@click.option("--out", type=click.Path(dir_okay=False), required=True,
              help="Output file; .json for JSON, anything else for CSV.")
def sweep(returns_path: str, grid_gamma: str | None, grid_budget: str | None,
          grid_m: str, utility: str, seed: int, range_, workers: int,
          out: str) -> None:
    """Trace conservatism curves across elicitation depths."""
    if grid_gamma is not None and grid_budget is not None:
        raise CliError("choose one of --grid-gamma and --grid-budget")
    scheme = "budget" if grid_budget is not None else "gamma"
    params = _parse_floats(grid_budget if grid_budget is not None
                           else (grid_gamma or "0.001,0.25,0.5,0.75,1"),
                           "--grid-budget" if grid_budget else "--grid-gamma")
    try:
        depths = [int(tok) for tok in grid_m.split(",") if tok.strip()]
    except ValueError as exc:
        raise CliError("--grid-M expects comma-separated integers") from exc
    if not depths or any(d < 0 for d in depths):
        raise CliError("--grid-M expects nonnegative integers")
    if utility not in ORACLES:
        raise CliError(f"unknown utility {utility!r}")
    if workers < 1:
        raise CliError("--workers must be at least 1")

    tickers, scenarios = _read_returns(returns_path)
    lo, hi = range_
    config = SessionConfig()
    points = []
    for depth in depths:
        session = start_session(lo, hi, mode="simulated", config=config,
                                oracle=utility)
        session.id = _deterministic_id(seed, utility, lo, hi, config)
        run(session, depth)
        inst = _build_instance(session, tickers, scenarios)
        try:
            points.extend(conservatism_sweep(inst, scheme, params,
                                             max_workers=workers))
        except ValueError as exc:
            raise CliError(str(exc)) from exc
    text = sweep_to_json(points) if out.endswith(".json") else write_sweep(points)
    Path(out).write_text(text, encoding="utf-8")
    click.echo(f"wrote {len(points)} rows to {out}")


@main.command()
@click.option("--session", "session_path", required=True,
              type=click.Path(dir_okay=False), help="Session JSON file.")
def metrics(session_path: str) -> None:
    """Print the progress metrics recorded in a session file."""
    session = _load_session(session_path)
    click.echo(_metric_table(session))
    click.echo(f"{session.answered_count} answered comparisons, "
               f"{session.grid.n} breakpoints, "
               f"{len(session.polyhedron.cuts)} active cuts"
               + ("; converged" if session.converged else ""))


if __name__ == "__main__":
    main()
