import json
import threading

import pytest
from fastapi.testclient import TestClient

from tracefix.cli import main as cli_main
from tracefix.service import create_app

from conftest import CORPUS, corpus_source

LARGESTGAP = corpus_source("largestgap.mj")
FIG1 = {"input": {"x": [9, 5, 4]}, "index": 6, "values": {"max": 9}}


@pytest.fixture
def client():
    app = create_app(solver_timeout=120)
    with TestClient(app) as c:
        yield c


def test_health(client):
    assert client.get("/api/health").json() == {"ok": True}


def test_trace_endpoint(client):
    r = client.post("/api/trace", json={"program": LARGESTGAP,
                                        "input": {"x": [9, 5, 4]}})
    assert r.status_code == 200
    doc = r.json()
    assert [s["loc"] for s in doc["steps"]] == [2, 3, 4, 5, 6, 7, 8, 5, 10,
                                                11, "exit"]


def test_trace_parse_error_400(client):
    r = client.post("/api/trace", json={"program": "int f( {",
                                        "input": {}})
    assert r.status_code == 400


def test_trace_runtime_fault_422(client):
    r = client.post("/api/trace", json={"program": LARGESTGAP,
                                        "input": {"x": []}})
    assert r.status_code == 422
    doc = r.json()
    assert "fault" in doc
    assert doc["steps"]  # partial trace included


def test_trace_fuel_truncation(client):
    r = client.post("/api/trace", json={"program": LARGESTGAP,
                                        "input": {"x": [9, 5, 4]},
                                        "fuel": 3})
    assert r.status_code == 200
    assert r.json()["terminated"] is False


def test_session_flow(client):
    r = client.post("/api/session", json={"program": LARGESTGAP,
                                          "manipulation": FIG1})
    assert r.status_code == 200
    doc = r.json()
    sid = doc["session_id"]
    assert doc["result"]["status"] == "repaired"
    assert doc["result"]["cost"] == 4
    assert doc["result"]["patch"][0]["line"] == 5

    record = client.get(f"/api/session/{sid}").json()
    assert record["state"] == "open"
    assert len(record["proposals"]) == 1

    rejected = client.post(f"/api/session/{sid}/reject",
                           json={"kind": "patch"})
    assert rejected.status_code == 200
    second = rejected.json()["result"]
    if second["status"] == "repaired":
        assert second["patch"] != doc["result"]["patch"]
        assert second["cost"] >= doc["result"]["cost"]

    record = client.get(f"/api/session/{sid}").json()
    assert len(record["proposals"]) == 2


def test_session_disallow_location(client):
    r = client.post("/api/session", json={"program": LARGESTGAP,
                                          "manipulation": FIG1})
    sid = r.json()["session_id"]
    rejected = client.post(f"/api/session/{sid}/reject",
                           json={"kind": "location", "location": 5})
    result = rejected.json()["result"]
    if result["status"] == "repaired":
        assert all(e["line"] != 5 for e in result["patch"])


def test_session_closed_after_no_repair(client):
    # a one-statement program has only a handful of distinct patches, so
    # rejections exhaust the space quickly
    r = client.post("/api/session", json={
        "program": corpus_source("id.mj"),
        "manipulation": {"input": {"x": 7}, "index": 1,
                         "values": {"res": 8}}})
    sid = r.json()["session_id"]
    assert r.json()["result"]["status"] == "repaired"
    last = None
    for _ in range(20):
        resp = client.post(f"/api/session/{sid}/reject",
                           json={"kind": "patch"})
        if resp.status_code == 409:
            break
        last = resp.json()["result"]
        if last["status"] == "no_repair":
            break
    assert last is not None and last["status"] == "no_repair"
    record = client.get(f"/api/session/{sid}").json()
    assert record["state"] == "closed"
    resp = client.post(f"/api/session/{sid}/reject", json={"kind": "patch"})
    assert resp.status_code == 409


def test_unknown_session_404(client):
    assert client.get("/api/session/nope").status_code == 404
    assert client.post("/api/session/nope/reject",
                       json={"kind": "patch"}).status_code == 404


def test_unresolvable_index_422(client):
    bad = dict(FIG1, index=99)
    r = client.post("/api/session", json={"program": LARGESTGAP,
                                          "manipulation": bad})
    assert r.status_code == 422


def test_single_line_option_honored(client):
    r = client.post("/api/session", json={
        "program": LARGESTGAP,
        "manipulation": FIG1,
        "options": {"mode": "single-line"}})
    doc = r.json()
    assert doc["result"]["status"] == "repaired"
    assert doc["result"]["patch"][0]["line"] == 5


def test_http_result_identical_to_cli(client, capsys, tmp_path):
    req = tmp_path / "req.json"
    req.write_text(json.dumps(FIG1))
    code = cli_main(["repair", str(CORPUS / "largestgap.mj"), str(req)])
    out = capsys.readouterr().out
    assert code == 0
    cli_doc = json.loads(out)
    http_doc = client.post("/api/session",
                           json={"program": LARGESTGAP,
                                 "manipulation": FIG1}).json()["result"]
    for doc in (cli_doc, http_doc):
        doc["stats"].pop("wall_time", None)
    assert cli_doc == http_doc


def test_sessions_isolated_under_concurrency(client):
    sids = []
    for _ in range(2):
        r = client.post("/api/session", json={"program": LARGESTGAP,
                                              "manipulation": FIG1})
        sids.append(r.json()["session_id"])
    results = {}

    def reject(sid):
        results[sid] = client.post(f"/api/session/{sid}/reject",
                                   json={"kind": "patch"}).json()["result"]

    threads = [threading.Thread(target=reject, args=(sid,)) for sid in sids]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert set(results) == set(sids)
    # both sessions progressed independently to the same second-best
    vals = list(results.values())
    for v in vals:
        v["stats"].pop("wall_time", None)
    assert vals[0] == vals[1]
    for sid in sids:
        record = client.get(f"/api/session/{sid}").json()
        assert len(record["proposals"]) == 2


def test_external_function_program_over_http(client):
    r = client.post("/api/session", json={
        "program": corpus_source("sumpow.mj"),
        "manipulation": {"tests": [{"input": {"x": 3}, "output": 15}]}})
    assert r.status_code == 200
    doc = r.json()["result"]
    assert doc["status"] == "repaired"
    assert doc["patch"][0]["after"] == "for(int i = 1; i < x+1; i++) {"


def test_solver_timeout_status():
    app = create_app(solver_timeout=0.001)
    with TestClient(app) as c:
        r = c.post("/api/session", json={"program": LARGESTGAP,
                                         "manipulation": FIG1})
        assert r.status_code == 200
        assert r.json()["result"]["status"] == "timeout"
