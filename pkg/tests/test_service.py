"""HTTP service behavior over a temporary session directory."""
from __future__ import annotations

import numpy as np
import pytest
from fastapi.testclient import TestClient

from prefelicit.elicit import Session, start_session, next_query, submit_answer
from prefelicit.polyhedron import analytic_center
from prefelicit.service import SessionStore, create_app


@pytest.fixture()
def client(tmp_path):
    app = create_app(tmp_path / "store")
    with TestClient(app) as c:
        c.store_dir = tmp_path / "store"
        yield c


def make_session(client, grid=(-0.5, 0.0, 0.25, 0.5)):
    resp = client.post("/sessions", json={
        "range": [grid[0], grid[-1]],
        "grid": list(grid),
        "mode": "interactive",
    })
    assert resp.status_code == 201
    return resp.json()


def test_create_returns_id_and_grid(client):
    body = make_session(client)
    assert body["grid"] == [-0.5, 0.0, 0.25, 0.5]
    assert (client.store_dir / f"{body['id']}.json").exists()


def test_default_grid_spans_the_range(client):
    resp = client.post("/sessions", json={"range": [-0.5, 0.5]})
    assert resp.status_code == 201
    assert resp.json()["grid"] == [-0.5, 0.0, 0.25, 0.5]


def test_bad_range_is_invalid(client):
    resp = client.post("/sessions", json={"range": [0.5, -0.5]})
    assert resp.status_code == 400
    assert resp.json()["error"]["code"] == "invalid"


def test_unknown_session_is_not_found(client):
    resp = client.get("/sessions/deadbeef")
    assert resp.status_code == 404
    assert resp.json()["error"]["code"] == "not_found"


def test_fresh_band_is_the_unit_interval(client):
    sid = make_session(client)["id"]
    band = client.get(f"/sessions/{sid}/band").json()
    assert band["breakpoints"] == [-0.5, 0.0, 0.25, 0.5]
    assert band["lower"][0] == 0.0 and band["upper"][0] == 0.0
    assert band["lower"][-1] == 1.0 and band["upper"][-1] == 1.0
    for i in (1, 2):
        assert band["lower"][i] == pytest.approx(0.0, abs=1e-9)
        assert band["upper"][i] == pytest.approx(1.0, abs=1e-9)
    for lo, mid, hi in zip(band["lower"], band["center"], band["upper"]):
        assert lo - 1e-9 <= mid <= hi + 1e-9


def test_query_then_answer_refines_the_grid(client):
    sid = make_session(client)["id"]
    q = client.post(f"/sessions/{sid}/query")
    assert q.status_code == 200
    card = q.json()
    pcts = [o["probability_pct"] for o in card["a"]["outcomes"]]
    assert sum(pcts) == pytest.approx(100.0, abs=1e-12)
    assert "for sure" in card["b"]["text"]
    amounts = [card["a"]["outcomes"][0]["amount"], card["b"]["amount"],
               card["a"]["outcomes"][1]["amount"]]
    assert amounts[0] <= amounts[1] <= amounts[2]

    ans = client.post(f"/sessions/{sid}/answer", json={"choice": "B"})
    assert ans.status_code == 200
    summary = ans.json()
    assert summary["grid"] == [-0.5, -0.05, 0.0, 0.25, 0.5]
    assert summary["n_queries"] == 1
    assert summary["pending"] is None
    assert len(summary["band"]["breakpoints"]) == 5


def test_query_repeats_while_pending(client):
    sid = make_session(client)["id"]
    first = client.post(f"/sessions/{sid}/query").json()
    second = client.post(f"/sessions/{sid}/query").json()
    assert first == second


def test_answer_without_pending_conflicts(client):
    sid = make_session(client)["id"]
    resp = client.post(f"/sessions/{sid}/answer", json={"choice": "A"})
    assert resp.status_code == 409
    assert resp.json()["error"]["code"] == "conflict"

    client.post(f"/sessions/{sid}/query")
    assert client.post(f"/sessions/{sid}/answer",
                       json={"choice": "A"}).status_code == 200
    again = client.post(f"/sessions/{sid}/answer", json={"choice": "A"})
    assert again.status_code == 409


def test_bad_choice_is_invalid(client):
    sid = make_session(client)["id"]
    client.post(f"/sessions/{sid}/query")
    resp = client.post(f"/sessions/{sid}/answer", json={"choice": "C"})
    assert resp.status_code == 400
    assert resp.json()["error"]["code"] == "invalid"


def test_gets_never_mutate(client):
    sid = make_session(client)["id"]
    client.post(f"/sessions/{sid}/query")
    path = client.store_dir / f"{sid}.json"
    before = path.read_bytes()
    one = client.get(f"/sessions/{sid}").json()
    two = client.get(f"/sessions/{sid}").json()
    assert one == two
    assert client.get(f"/sessions/{sid}/band").json() == \
        client.get(f"/sessions/{sid}/band").json()
    assert path.read_bytes() == before


def test_converged_session_refuses_new_queries(client, tmp_path):
    sid = make_session(client)["id"]
    store = SessionStore(client.store_dir)
    session = store.load(sid)
    session.converged = True
    store.save(session)
    resp = client.post(f"/sessions/{sid}/query")
    assert resp.status_code == 409
    assert resp.json()["error"]["code"] == "converged"


def test_persistence_round_trip_reproduces_the_center(tmp_path):
    session = start_session(-0.5, 0.5, mode="simulated", oracle="exp10")
    for _ in range(3):
        rec = next_query(session)
        from prefelicit.elicit import simulated_answer
        submit_answer(session, simulated_answer(session.oracle, rec))
    center_before = analytic_center(session.polyhedron).lifted

    store = SessionStore(tmp_path / "store")
    store.save(session)
    loaded = store.load(session.id)
    center_after = analytic_center(loaded.polyhedron).lifted
    assert loaded.grid.points == session.grid.points
    assert np.max(np.abs(center_after - center_before)) <= 1e-10
    assert store.list_ids() == [session.id]


SCEN_CSV = "GRB,TLT\n0.3,-0.2\n-0.4,0.1\n0.2,0.4\n"


def _solve(client, tmp_path, sid, scheme, parameter=None):
    path = tmp_path / "returns.csv"
    path.write_text(SCEN_CSV, encoding="utf-8")
    return client.post("/pro/solve", json={
        "session_id": sid,
        "scenarios_csv_ref": str(path),
        "scheme": scheme,
        "parameter": parameter,
    })


def test_pro_solve_classic_and_dials(client, tmp_path):
    sid = make_session(client)["id"]
    resp = _solve(client, tmp_path, sid, "classic")
    assert resp.status_code == 200
    body = resp.json()
    assert body["tickers"] == ["GRB", "TLT"]
    assert sum(body["z"]) == pytest.approx(1.0, abs=1e-8)
    classic = body["value"]

    tight = _solve(client, tmp_path, sid, "gamma", 0.25).json()["value"]
    assert tight >= classic - 1e-7

    assert _solve(client, tmp_path, sid, "budget", None).status_code == 400


def test_pro_solve_rejects_bad_inputs(client, tmp_path):
    sid = make_session(client)["id"]
    missing = client.post("/pro/solve", json={
        "session_id": sid,
        "scenarios_csv_ref": str(tmp_path / "absent.csv"),
        "scheme": "classic",
    })
    assert missing.status_code == 400

    wild = tmp_path / "wild.csv"
    wild.write_text("A,B\n5.0,0.1\n", encoding="utf-8")
    out_of_range = client.post("/pro/solve", json={
        "session_id": sid,
        "scenarios_csv_ref": str(wild),
        "scheme": "classic",
    })
    assert out_of_range.status_code == 400
    assert "scenario" in out_of_range.json()["error"]["message"]

    nosession = client.post("/pro/solve", json={
        "session_id": "feedface",
        "scenarios_csv_ref": str(wild),
        "scheme": "classic",
    })
    assert nosession.status_code == 404
