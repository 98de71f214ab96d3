"""Server handles and transports for the harness.

``InProcessServer`` embeds the real gateway and coordinators in this process;
``RemoteServer`` talks to a live deployment over HTTP and WebSockets. Both
expose the same small surface so scenarios run unchanged against either.
"""

from __future__ import annotations

import tempfile
from collections import deque

import httpx
from starlette.testclient import TestClient

from ..config import AppConfig
from ..gateway import create_app
from ..sync import SessionCoordinator


class SimClock:
    """Deterministic clock: every reading advances time by a fixed step."""

    def __init__(self, start: float = 1_700_000_000.0, step: float = 0.001):
        self.start = start
        self.step = step
        self.calls = 0
        self.offset = 0.0

    def __call__(self) -> float:
        self.calls += 1
        return self.start + self.offset + self.calls * self.step

    def advance(self, seconds: float) -> None:
        self.offset += seconds


class LoopbackTransport:
    """Synchronous in-process link: sends run the coordinator inline, and all
    resulting fan-out lands in per-client inboxes before send() returns."""

    def __init__(self, coordinator: SessionCoordinator):
        self.coordinator = coordinator
        self.inbox: deque[str] = deque()
        self.closed = False
        outer = self

        class _Link:
            def deliver(self, text: str) -> None:
                outer.inbox.append(text)

            def close(self) -> None:
                outer.closed = True

        self.conn = coordinator.open_connection(_Link())

    def send(self, text: str) -> None:
        if self.closed:
            raise ConnectionError("transport closed")
        self.coordinator.on_text(self.conn, text)

    def receive(self, timeout: float = 0.0) -> str | None:
        return self.inbox.popleft() if self.inbox else None

    def close(self) -> None:
        if not self.closed:
            self.closed = True
            self.coordinator.drop_connection(self.conn)


class WsTransport:
    """WebSocket link to a live server (harness remote mode)."""

    def __init__(self, url: str):
        from websockets.sync.client import connect

        self._ws = connect(url)
        self.closed = False

    def send(self, text: str) -> None:
        self._ws.send(text)

    def receive(self, timeout: float = 0.0) -> str | None:
        try:
            frame = self._ws.recv(timeout=timeout)
        except TimeoutError:
            return None
        except Exception:
            self.closed = True
            return None
        return frame if isinstance(frame, str) else frame.decode("utf-8")

    def close(self) -> None:
        if not self.closed:
            self.closed = True
            try:
                self._ws.close()
            except Exception:
                pass


class InProcessServer:
    """The real service embedded in the harness process.

    HTTP goes through an in-process ASGI client against the real gateway;
    sync connections are loopback links into the same coordinators.
    ``kill()`` abandons the running service without any graceful persistence
    work, which is exactly what a crash looks like to the journal.
    """

    def __init__(
        self,
        storage_root: str | None = None,
        user_count: int = 8,
        clock: SimClock | None = None,
        config_overrides: dict | None = None,
    ):
        self.storage_root = storage_root or tempfile.mkdtemp(prefix="wallspace-sim-")
        self.user_count = user_count
        self.clock = clock or SimClock()
        self.config_overrides = dict(config_overrides or {})
        self._client: TestClient | None = None
        self._start()

    def _start(self) -> None:
        config = AppConfig(
            storage_root=self.storage_root,
            users=[
                {"name": f"user{i}", "secret": f"pw{i}"} for i in range(self.user_count)
            ],
        )
        for key, value in self.config_overrides.items():
            setattr(config, key, value)
        self.app = create_app(
            config, clock=self.clock, deterministic=True, run_background_tick=False
        )
        self._client = TestClient(self.app)
        self._client.__enter__()
        self.hub = self.app.state.hub

    @property
    def http(self) -> TestClient:
        assert self._client is not None, "server was killed"
        return self._client

    def credentials(self, index: int) -> tuple[str, str]:
        return f"user{index}", f"pw{index}"

    def login(self, name: str, secret: str) -> str:
        response = self.http.post("/api/login", json={"name": name, "secret": secret})
        response.raise_for_status()
        return response.json()["token"]

    def create_session(self, name: str, token: str,
                       grid_cols: int | None = None, grid_rows: int | None = None) -> str:
        body: dict = {"name": name}
        if grid_cols:
            body["gridCols"] = grid_cols
        if grid_rows:
            body["gridRows"] = grid_rows
        response = self.http.post(
            "/api/sessions", json=body, headers={"Authorization": f"Bearer {token}"}
        )
        response.raise_for_status()
        return response.json()["sessionId"]

    def export(self, session_id: str, token: str) -> str:
        response = self.http.get(
            f"/api/sessions/{session_id}/export",
            headers={"Authorization": f"Bearer {token}"},
        )
        response.raise_for_status()
        return response.text

    def connect_transport(self, session_id: str) -> LoopbackTransport:
        coordinator = self.hub.get(session_id)
        if coordinator is None:
            raise LookupError(f"no session {session_id!r}")
        return LoopbackTransport(coordinator)

    def tick(self) -> None:
        self.hub.tick()

    def kill(self) -> None:
        """Drop the service on the floor; only the journal survives."""
        self._client = None
        self.app.state.hub = None
        self.hub = None

    def restart(self) -> None:
        """Start a fresh service over the same storage root (post-crash)."""
        self._start()

    def shutdown(self) -> None:
        if self._client is not None:
            self._client.__exit__(None, None, None)
            self._client = None


class RemoteServer:
    """A live deployment reached over the network."""

    def __init__(self, base_url: str, credentials: list[tuple[str, str]] | None = None):
        self.base_url = base_url.rstrip("/")
        self._creds = credentials or [("demo", "demo")]
        self.http = httpx.Client(base_url=self.base_url, timeout=10.0)

    def credentials(self, index: int) -> tuple[str, str]:
        return self._creds[index % len(self._creds)]

    def login(self, name: str, secret: str) -> str:
        response = self.http.post("/api/login", json={"name": name, "secret": secret})
        response.raise_for_status()
        return response.json()["token"]

    def create_session(self, name: str, token: str,
                       grid_cols: int | None = None, grid_rows: int | None = None) -> str:
        body: dict = {"name": name}
        if grid_cols:
            body["gridCols"] = grid_cols
        if grid_rows:
            body["gridRows"] = grid_rows
        response = self.http.post(
            "/api/sessions", json=body, headers={"Authorization": f"Bearer {token}"}
        )
        response.raise_for_status()
        return response.json()["sessionId"]

    def export(self, session_id: str, token: str) -> str:
        response = self.http.get(
            f"/api/sessions/{session_id}/export",
            headers={"Authorization": f"Bearer {token}"},
        )
        response.raise_for_status()
        return response.text

    def connect_transport(self, session_id: str, token: str = "") -> WsTransport:
        ws_base = self.base_url.replace("http://", "ws://").replace("https://", "wss://")
        return WsTransport(f"{ws_base}/api/sessions/{session_id}/channel?token={token}")

    def tick(self) -> None:
        pass  # a live server runs its own maintenance loop

    def shutdown(self) -> None:
        self.http.close()
