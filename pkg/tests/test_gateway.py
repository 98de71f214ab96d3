"""HTTP edge: auth, session CRUD, uploads, export, sync channel, UI serving."""

import json

import pytest
from starlette.testclient import TestClient

from wallspace.canonical import canonical_text
from wallspace.config import AppConfig
from wallspace.gateway import create_app, infer_content_kind
from wallspace.session import ContentKind
from wallspace.simharness.runtime import SimClock
from wallspace.sync import PROTOCOL_VERSION, envelope

USERS = [{"name": "alice", "secret": "wonder"}, {"name": "bob", "secret": "builder"}]


@pytest.fixture()
def rig(tmp_path):
    clock = SimClock()
    config = AppConfig(
        storage_root=str(tmp_path / "data"),
        users=USERS,
        upload_limit_bytes=1024 * 1024,
        token_ttl_seconds=3600.0,
    )
    app = create_app(config, clock=clock, deterministic=True,
                     run_background_tick=False)
    with TestClient(app) as client:
        yield client, clock


def login(client, name="alice", secret="wonder") -> str:
    response = client.post("/api/login", json={"name": name, "secret": secret})
    assert response.status_code == 200
    return response.json()["token"]


def auth(token: str) -> dict:
    return {"Authorization": f"Bearer {token}"}


def make_session(client, token, name="standup") -> str:
    response = client.post("/api/sessions", json={"name": name},
                           headers=auth(token))
    assert response.status_code == 200
    return response.json()["sessionId"]


# ---------------------------------------------------------------------------
# Auth
# ---------------------------------------------------------------------------


def test_login_and_reject_bad_secret(rig):
    client, _ = rig
    assert login(client)
    assert client.post("/api/login",
                       json={"name": "alice", "secret": "nope"}).status_code == 401
    assert client.post("/api/login",
                       json={"name": "carol", "secret": "x"}).status_code == 401


def test_every_endpoint_requires_a_valid_token(rig):
    client, clock = rig
    token = login(client)
    session_id = make_session(client, token)
    expired = login(client)
    clock.advance(7200.0)  # past the 3600s ttl
    fresh = login(client)

    probes = [
        ("GET", "/api/sessions", None),
        ("POST", "/api/sessions", {"name": "x"}),
        ("GET", f"/api/sessions/{session_id}", None),
        ("GET", f"/api/sessions/{session_id}/export", None),
        ("GET", "/api/files/deadbeef", None),
    ]
    for method, path, body in probes:
        for bearer, expect_auth_ok in ((None, False), (expired, False), (fresh, True)):
            headers = auth(bearer) if bearer else {}
            response = client.request(method, path, json=body, headers=headers)
            if expect_auth_ok:
                assert response.status_code != 401, (method, path)
            else:
                assert response.status_code == 401, (method, path, bearer)
    # uploads too: the token check fires before any multipart handling
    for bearer, expect_auth_ok in ((None, False), (expired, False), (fresh, True)):
        headers = auth(bearer) if bearer else {}
        response = client.post(
            f"/api/sessions/{session_id}/files",
            files={"file": ("a.pdf", b"x", "application/pdf")},
            headers=headers,
        )
        assert (response.status_code != 401) == expect_auth_ok


# ---------------------------------------------------------------------------
# Sessions
# ---------------------------------------------------------------------------


def test_session_crud_and_metadata(rig):
    client, _ = rig
    token = login(client)
    session_id = make_session(client, token, name="tire review")

    listing = client.get("/api/sessions", headers=auth(token)).json()
    assert [s["id"] for s in listing] == [session_id]
    assert listing[0]["name"] == "tire review"
    assert listing[0]["participantCount"] == 0

    metadata = client.get(f"/api/sessions/{session_id}", headers=auth(token)).json()
    assert metadata["version"] == 0
    assert metadata["activeWallId"] == "w1"
    assert metadata["wallPixelWidth"] == 12690
    assert metadata["wallPixelHeight"] == 3840

    assert client.get("/api/sessions/s-nope",
                      headers=auth(token)).status_code == 404
    assert client.post("/api/sessions", json={"name": "  "},
                       headers=auth(token)).status_code == 400


# ---------------------------------------------------------------------------
# Uploads and downloads
# ---------------------------------------------------------------------------

PDF_BYTES = b"%PDF-1.4 fake but binary \x00\x01\x02 content"


def test_upload_pdf_descriptor_and_byte_identical_download(rig):
    client, _ = rig
    token = login(client)
    session_id = make_session(client, token)
    response = client.post(
        f"/api/sessions/{session_id}/files",
        files={"file": ("design.pdf", PDF_BYTES, "application/pdf")},
        headers=auth(token),
    )
    assert response.status_code == 200
    descriptor = response.json()["contentDescriptor"]
    assert descriptor["kind"] == "Pdf"
    assert descriptor["title"] == "design.pdf"
    digest = descriptor["source"]["file"]

    again = client.post(
        f"/api/sessions/{session_id}/files",
        files={"file": ("copy.pdf", PDF_BYTES, "application/pdf")},
        headers=auth(token),
    ).json()["contentDescriptor"]
    assert again["source"]["file"] == digest  # content-addressed dedupe

    download = client.get(f"/api/files/{digest}", headers=auth(token))
    assert download.status_code == 200
    assert download.content == PDF_BYTES
    assert download.headers["content-type"].startswith("application/pdf")


def test_upload_unknown_kind_415(rig):
    client, _ = rig
    token = login(client)
    session_id = make_session(client, token)
    response = client.post(
        f"/api/sessions/{session_id}/files",
        files={"file": ("notes.xyz", b"???", "application/octet-stream")},
        headers=auth(token),
    )
    assert response.status_code == 415


def test_upload_too_large_413(rig):
    client, _ = rig
    token = login(client)
    session_id = make_session(client, token)
    response = client.post(
        f"/api/sessions/{session_id}/files",
        files={"file": ("big.pdf", b"x" * (1024 * 1024 + 1), "application/pdf")},
        headers=auth(token),
    )
    assert response.status_code == 413


def test_kind_inference_falls_back_to_extension():
    assert infer_content_kind("application/octet-stream", "a.pdf") is ContentKind.PDF
    assert infer_content_kind(None, "b.PNG") is ContentKind.IMAGE
    assert infer_content_kind("video/mp4", "clip.bin") is ContentKind.VIDEO
    assert infer_content_kind("text/plain", "notes.txt") is None


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------


def test_export_is_the_canonical_document(rig):
    client, _ = rig
    token = login(client)
    session_id = make_session(client, token)
    response = client.get(f"/api/sessions/{session_id}/export",
                          headers=auth(token))
    assert response.status_code == 200
    doc = json.loads(response.text)
    assert canonical_text(doc) == response.text
    assert doc["id"] == session_id
    assert doc["version"] == 0
    assert client.get("/api/sessions/s-nope/export",
                      headers=auth(token)).status_code == 404


# ---------------------------------------------------------------------------
# Sync channel over websockets
# ---------------------------------------------------------------------------


def hello_frame(session_id: str, token: str, role="Tabletop") -> str:
    return canonical_text(envelope("Hello", session_id, payload={
        "token": token, "role": role, "protoVersion": PROTOCOL_VERSION}))


def test_ws_channel_full_round_trip(rig):
    client, _ = rig
    token = login(client)
    session_id = make_session(client, token)
    with client.websocket_connect(
        f"/api/sessions/{session_id}/channel?token={token}"
    ) as ws:
        ws.send_text(hello_frame(session_id, token))
        welcome = json.loads(ws.receive_text())
        assert welcome["type"] == "Welcome"
        assert welcome["payload"]["participantId"] == "p-alice"
        assert welcome["payload"]["protoVersion"] == PROTOCOL_VERSION
        snapshot = json.loads(ws.receive_text())
        assert snapshot["type"] == "Snapshot"
        assert snapshot["payload"]["version"] == 0
        join = json.loads(ws.receive_text())
        assert join["type"] == "Event" and join["seq"] == 1
        presence = json.loads(ws.receive_text())
        assert presence["type"] == "Presence"

        ws.send_text(canonical_text(envelope(
            "Command", session_id, sender_id="p-alice", request_id="q1",
            payload={"variant": "ApplyPreset",
                     "args": {"viewCount": 4, "variantIndex": 0}})))
        event = json.loads(ws.receive_text())
        assert event["type"] == "Event"
        assert event["requestId"] == "q1"
        assert event["seq"] == 2

    exported = client.get(f"/api/sessions/{session_id}/export",
                          headers=auth(token)).json()
    assert len(exported["walls"][0]["viewports"]) == 4


def test_ws_rejects_bad_token_and_unknown_session(rig):
    client, _ = rig
    token = login(client)
    session_id = make_session(client, token)
    from starlette.websockets import WebSocketDisconnect

    with pytest.raises(WebSocketDisconnect) as excinfo:
        with client.websocket_connect(
            f"/api/sessions/{session_id}/channel?token=bogus"
        ) as ws:
            ws.receive_text()
    assert excinfo.value.code == 4401

    with pytest.raises(WebSocketDisconnect) as excinfo:
        with client.websocket_connect(
            f"/api/sessions/s-nope/channel?token={token}"
        ) as ws:
            ws.receive_text()
    assert excinfo.value.code == 4404


def test_two_ws_clients_converge(rig):
    client, _ = rig
    token_a = login(client, "alice", "wonder")
    token_b = login(client, "bob", "builder")
    session_id = make_session(client, token_a)
    with client.websocket_connect(
        f"/api/sessions/{session_id}/channel?token={token_a}"
    ) as ws_a, client.websocket_connect(
        f"/api/sessions/{session_id}/channel?token={token_b}"
    ) as ws_b:
        ws_a.send_text(hello_frame(session_id, token_a, role="WallDisplay"))
        ws_b.send_text(hello_frame(session_id, token_b))
        ws_a.send_text(canonical_text(envelope(
            "Command", session_id, sender_id="p-alice", request_id="qa1",
            payload={"variant": "CreateWall", "args": {"name": "B"}})))
        # bob eventually sees alice's event with her requestId echoed
        seen = None
        for _ in range(12):
            frame = json.loads(ws_b.receive_text())
            if frame["type"] == "Event" and frame.get("requestId") == "qa1":
                seen = frame
                break
        assert seen is not None
        assert seen["senderId"] == "p-alice"


# ---------------------------------------------------------------------------
# UI bundle independence
# ---------------------------------------------------------------------------


def test_api_headless_without_ui_bundle(rig):
    client, _ = rig
    assert client.get("/").status_code == 404
    token = login(client)
    assert client.get("/api/sessions", headers=auth(token)).status_code == 200


def test_ui_bundle_served_when_present(tmp_path):
    ui_dir = tmp_path / "ui"
    ui_dir.mkdir()
    (ui_dir / "index.html").write_text("<html><body>wall</body></html>")
    config = AppConfig(storage_root=str(tmp_path / "data"), users=USERS,
                       ui_dir=str(ui_dir))
    app = create_app(config, clock=SimClock(), deterministic=True,
                     run_background_tick=False)
    with TestClient(app) as client:
        page = client.get("/")
        assert page.status_code == 200
        assert "wall" in page.text
        token = login(client)
        assert client.get("/api/sessions", headers=auth(token)).status_code == 200
