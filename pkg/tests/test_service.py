"""Session service protocol tests over the in-process ASGI app."""

import json

import pytest
from fastapi.testclient import TestClient

from chainform.cli import main as cli_main
from chainform.service import create_app


@pytest.fixture
def client():
    app = create_app()
    with TestClient(app) as c:
        yield c


def create_session(client, scenario="baseline"):
    resp = client.post("/v1/session", json={"scenario": scenario})
    assert resp.status_code == 200, resp.text
    return resp.json()


class TestLifecycle:
    def test_create_from_bundled_baseline(self, client):
        state = create_session(client)
        assert state["v"] == 1
        assert state["chain_sizes"] == [29]
        assert len(state["frame"]["points"]) == 29
        assert state["revision"] == 1  # initial frame recorded

    def test_create_from_inline_document(self, client):
        doc = {
            "version": 1, "name": "inline",
            "initial_geometry": [[[0, 0], [25, 0]]],
            "material": {"youngs_modulus_pa": 60e9, "poisson_ratio": 0.5,
                         "cross_section_area_um2": 1.767145867644257,
                         "density_kg_m3": 1200.0},
            "solver": {"dt_s": 0.1, "substeps": 10, "rest_length_um": 5.0,
                       "threshold": 0.05, "max_sweeps": 100000},
            "schedule": {"settle_between": True, "moves": []},
            "outputs": {"csv": True, "metrics": True},
        }
        state = create_session(client, doc)
        assert state["chain_sizes"] == [6]

    def test_invalid_scenario_rejected(self, client):
        resp = client.post("/v1/session", json={"scenario": {"version": 1}})
        assert resp.status_code == 400
        body = resp.json()
        assert body["error"] == "invalid_scenario"
        assert body["v"] == 1

    def test_unknown_session_404(self, client):
        resp = client.get("/v1/session/nope/state")
        assert resp.status_code == 404
        assert resp.json()["error"] == "unknown_session"

    def test_list_scenarios(self, client):
        resp = client.get("/v1/scenarios")
        assert "baseline" in resp.json()["scenarios"]

    def test_get_scenario_document(self, client):
        resp = client.get("/v1/scenarios/letter-p")
        assert resp.status_code == 200
        doc = resp.json()["scenario"]
        assert doc["name"] == "letter-p"
        assert doc["schedule"]["moves"][0]["point_id"] == 38
        assert client.get("/v1/scenarios/nope").status_code == 404


class TestDrag:
    def test_baseline_drag_contract(self, client):
        state = create_session(client)
        sid = state["session_id"]
        resp = client.post(f"/v1/session/{sid}/drag", json={
            "point_id": 28, "target": {"x": 150.0, "y": 60.0}, "step_um": 1.0,
        })
        assert resp.status_code == 200
        body = resp.json()
        assert body["quiescent"] is True
        assert body["frames"] == 50
        assert body["metrics"]["quiescent"] is True
        assert body["frame"]["points"][28] == [150.0, 60.0]
        assert body["revision"] > state["revision"]

    def test_invalid_point_rejected(self, client):
        sid = create_session(client)["session_id"]
        resp = client.post(f"/v1/session/{sid}/drag", json={
            "point_id": 99, "target": {"x": 0, "y": 0}, "step_um": 1.0,
        })
        assert resp.status_code == 400
        assert resp.json()["error"] == "invalid_point"

    def test_bad_step_rejected(self, client):
        sid = create_session(client)["session_id"]
        resp = client.post(f"/v1/session/{sid}/drag", json={
            "point_id": 28, "target": {"x": 150, "y": 60}, "step_um": 0,
        })
        assert resp.status_code == 400
        assert resp.json()["field"] == "step_um"

    def test_export_matches_cli_run_byte_for_byte(self, client, tmp_path):
        # One shared solver path: a session drag equals the compiled
        # schedule run by the CLI on the same scenario.
        out = tmp_path / "cli"
        assert cli_main(["run", "--scenario", "baseline", "--out", str(out)]) == 0
        cli_csv = (out / "trajectory.csv").read_bytes()

        sid = create_session(client)["session_id"]
        client.post(f"/v1/session/{sid}/drag", json={
            "point_id": 28, "target": {"x": 150.0, "y": 60.0}, "step_um": 1.0,
        })
        exported = client.get(f"/v1/session/{sid}/export")
        assert exported.status_code == 200
        assert exported.content == cli_csv


class TestUndoAndState:
    def test_undo_restores_pre_drag_state_bit_exactly(self, client):
        state0 = create_session(client)
        sid = state0["session_id"]
        client.post(f"/v1/session/{sid}/drag", json={
            "point_id": 28, "target": {"x": 150.0, "y": 35.0}, "step_um": 1.0,
        })
        after = client.get(f"/v1/session/{sid}/state").json()
        assert after["frame"]["points"] != state0["frame"]["points"]
        undone = client.post(f"/v1/session/{sid}/undo").json()
        assert undone["frame"]["points"] == state0["frame"]["points"]
        assert undone["revision"] > after["revision"]

    def test_undo_empty_history(self, client):
        sid = create_session(client)["session_id"]
        resp = client.post(f"/v1/session/{sid}/undo")
        assert resp.status_code == 409

    def test_step_advances_revision(self, client):
        sid = create_session(client)["session_id"]
        r1 = client.post(f"/v1/session/{sid}/step").json()
        r2 = client.post(f"/v1/session/{sid}/step").json()
        assert r2["revision"] > r1["revision"]

    def test_sessions_are_isolated(self, client):
        a = create_session(client)["session_id"]
        b = create_session(client)["session_id"]
        client.post(f"/v1/session/{a}/drag", json={
            "point_id": 28, "target": {"x": 150.0, "y": 30.0}, "step_um": 1.0,
        })
        state_b = client.get(f"/v1/session/{b}/state").json()
        assert state_b["frame"]["points"][28] == [150.0, 10.0]


class TestScore:
    def test_score_straight_target_is_zero(self, client):
        sid = create_session(client)["session_id"]
        resp = client.post(f"/v1/session/{sid}/score", json={
            "target_polyline": [[10.0, 10.0], [150.0, 10.0]],
        })
        body = resp.json()
        assert body["rms_um"] == pytest.approx(0.0, abs=1e-12)
        assert body["hausdorff_um"] == pytest.approx(0.0, abs=1e-12)

    def test_malformed_target_rejected(self, client):
        sid = create_session(client)["session_id"]
        resp = client.post(f"/v1/session/{sid}/score", json={"target_polyline": [[1]]})
        assert resp.status_code == 400


class TestStream:
    def test_stream_delivers_final_quiescent_frame(self, client):
        sid = create_session(client)["session_id"]
        with client.websocket_connect(f"/v1/session/{sid}/stream") as ws:
            hello = ws.receive_json()
            assert hello["v"] == 1
            client.post(f"/v1/session/{sid}/drag", json={
                "point_id": 28, "target": {"x": 150.0, "y": 20.0}, "step_um": 1.0,
            })
            final_state = client.get(f"/v1/session/{sid}/state").json()
            last = None
            revisions = []
            while True:
                msg = ws.receive_json()
                revisions.append(msg["revision"])
                last = msg
                if msg["revision"] == final_state["revision"]:
                    break
            # Revisions strictly increase and the settled frame arrives.
            assert revisions == sorted(revisions)
            assert last["frame"]["points"] == final_state["frame"]["points"]

    def test_stream_unknown_session_closes(self, client):
        from starlette.websockets import WebSocketDisconnect

        with pytest.raises(WebSocketDisconnect):
            with client.websocket_connect("/v1/session/none/stream") as ws:
                ws.receive_json()
