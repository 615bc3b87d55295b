"""Reading scenario tables and writing sweep results.

Scenario files are plain comma-separated text with a required header row
naming the assets; each following row is one period's returns, one column
per asset. Quoting follows the common interchange convention, numbers use
a decimal point, and anything else is rejected with a pointed message
rather than guessed at.
"""
from __future__ import annotations

import csv
import io
import json
import re
from typing import Iterable, Sequence

from .pro import SweepPoint

_NUMBER = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")


def _parse_number(token: str, where: str) -> float:
    token = token.strip()
    if not _NUMBER.match(token):
        raise ValueError(f"{where}: {token!r} is not a plain decimal number")
    return float(token)


def read_scenarios(text: str) -> tuple[tuple[str, ...], tuple[tuple[float, ...], ...]]:
    """Parse scenario CSV text into tickers and per-period return rows."""
    reader = csv.reader(io.StringIO(text))
    rows = [row for row in reader if row and any(cell.strip() for cell in row)]
    if len(rows) < 2:
        raise ValueError("scenario file needs a header row and at least one period")
    tickers = tuple(cell.strip() for cell in rows[0])
    if any(not t for t in tickers):
        raise ValueError("header row has an empty ticker")
    if len(set(tickers)) != len(tickers):
        raise ValueError("header row repeats a ticker")
    scenarios = []
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != len(tickers):
            raise ValueError(f"line {i}: expected {len(tickers)} columns, got {len(row)}")
        scenarios.append(tuple(_parse_number(cell, f"line {i}") for cell in row))
    return tickers, tuple(scenarios)


def read_scenarios_file(path: str) -> tuple[tuple[str, ...], tuple[tuple[float, ...], ...]]:
    with open(path, encoding="utf-8") as fh:
        return read_scenarios(fh.read())


def write_scenarios(tickers: Sequence[str], scenarios: Iterable[Sequence[float]]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(list(tickers))
    for row in scenarios:
        writer.writerow([repr(float(x)) for x in row])
    return out.getvalue()


def write_sweep(points: Sequence[SweepPoint]) -> str:
    """Render sweep results with the fixed column order M, scheme, param,
    value, then one column per portfolio weight."""
    if not points:
        raise ValueError("nothing to write: the sweep is empty")
    n_assets = len(points[0].weights)
    if any(len(p.weights) != n_assets for p in points):
        raise ValueError("sweep points disagree on the number of assets")
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["M", "scheme", "param", "value"]
                    + [f"z{i + 1}" for i in range(n_assets)])
    for p in points:
        writer.writerow([p.n_cuts, p.scheme, repr(p.parameter), repr(p.value)]
                        + [repr(w) for w in p.weights])
    return out.getvalue()


def sweep_to_json(points: Sequence[SweepPoint]) -> str:
    payload = [
        {"M": p.n_cuts, "scheme": p.scheme, "param": p.parameter,
         "value": p.value, "z": list(p.weights)}
        for p in points
    ]
    return json.dumps(payload, indent=2)
