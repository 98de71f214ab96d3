"""HTTP edge: authentication, session CRUD, uploads, export, UI, sync channel.

Every mutating route requires a bearer token from ``POST /api/login``. The
API is fully functional without any UI bundle; when ``ui_dir`` is configured
and present it is served at ``/`` purely as static assets.
"""

from __future__ import annotations

import asyncio
import contextlib
from pathlib import Path

from fastapi import Depends, FastAPI, HTTPException, Request, UploadFile, WebSocket
from fastapi.responses import Response
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel
from starlette.websockets import WebSocketDisconnect

from .auth import TokenAuthenticator
from .config import AppConfig
from .errors import CommandRejected
from .persistence import BlobStore, FileStorage
from .session import ContentKind
from .sync import Hub, SyncSettings

_MEDIA_KINDS = {"application/pdf": ContentKind.PDF}
_EXT_KINDS = {
    ".pdf": ContentKind.PDF,
    ".png": ContentKind.IMAGE,
    ".jpg": ContentKind.IMAGE,
    ".jpeg": ContentKind.IMAGE,
    ".gif": ContentKind.IMAGE,
    ".webp": ContentKind.IMAGE,
    ".svg": ContentKind.IMAGE,
    ".mp4": ContentKind.VIDEO,
    ".webm": ContentKind.VIDEO,
    ".mov": ContentKind.VIDEO,
    ".mkv": ContentKind.VIDEO,
}


def infer_content_kind(media_type: str | None, file_name: str) -> ContentKind | None:
    """Media type first, extension fallback; None when no safe guess exists."""
    if media_type:
        media_type = media_type.split(";")[0].strip().lower()
        if media_type in _MEDIA_KINDS:
            return _MEDIA_KINDS[media_type]
        if media_type.startswith("image/"):
            return ContentKind.IMAGE
        if media_type.startswith("video/"):
            return ContentKind.VIDEO
    return _EXT_KINDS.get(Path(file_name).suffix.lower())


class LoginRequest(BaseModel):
    name: str
    secret: str


class LoginResponse(BaseModel):
    token: str


class CreateSessionRequest(BaseModel):
    name: str
    gridCols: int | None = None
    gridRows: int | None = None


class CreateSessionResponse(BaseModel):
    sessionId: str


class SessionSummary(BaseModel):
    id: str
    name: str
    lastActive: int
    participantCount: int


class WallBrief(BaseModel):
    id: str
    name: str


class SessionMetadata(BaseModel):
    id: str
    name: str
    lastActive: int
    participantCount: int
    version: int
    activeWallId: str
    walls: list[WallBrief]
    wallPixelWidth: int
    wallPixelHeight: int


class ContentDescriptor(BaseModel):
    kind: str
    source: dict
    title: str


class UploadResponse(BaseModel):
    contentDescriptor: ContentDescriptor


def create_app(
    config: AppConfig | None = None,
    *,
    clock=None,
    deterministic: bool = False,
    run_background_tick: bool = True,
) -> FastAPI:
    config = config or AppConfig()
    backend = FileStorage(config.storage_root)
    authenticator = TokenAuthenticator(
        config.user_secrets(),
        ttl_seconds=config.token_ttl_seconds,
        clock=clock,
        deterministic=deterministic,
    )
    settings = SyncSettings(
        heartbeat_interval=config.heartbeat_interval,
        heartbeat_miss_limit=config.heartbeat_miss_limit,
        max_cursor_rate=config.max_cursor_rate,
        snapshot_every_events=config.snapshot_every_events,
        snapshot_every_seconds=config.snapshot_every_seconds,
    )
    hub = Hub(
        backend,
        authenticator,
        settings,
        clock=clock,
        deterministic_ids=deterministic,
    )
    blobs = BlobStore(backend)

    @contextlib.asynccontextmanager
    async def lifespan(app: FastAPI):
        task = None
        if run_background_tick and not deterministic:
            async def ticker():
                while True:
                    await asyncio.sleep(max(0.25, config.heartbeat_interval / 4))
                    hub.tick()

            task = asyncio.create_task(ticker())
        yield
        if task is not None:
            task.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await task
        hub.close()

    app = FastAPI(title="wallspace", lifespan=lifespan)
    app.state.hub = hub
    app.state.auth = authenticator
    app.state.blobs = blobs
    app.state.config = config

    def require_user(request: Request) -> str:
        token = None
        header = request.headers.get("authorization", "")
        if header.lower().startswith("bearer "):
            token = header[7:].strip()
        if token is None:
            token = request.query_params.get("token")
        user = authenticator.resolve(token) if token else None
        if user is None:
            raise HTTPException(status_code=401, detail="valid token required")
        return user

    def lookup(session_id: str):
        coordinator = hub.get(session_id)
        if coordinator is None:
            raise HTTPException(status_code=404, detail=f"no session {session_id!r}")
        return coordinator

    @app.get("/api/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.post("/api/login", response_model=LoginResponse)
    def login(body: LoginRequest) -> LoginResponse:
        token = authenticator.login(body.name, body.secret)
        if token is None:
            raise HTTPException(status_code=401, detail="unknown user or bad secret")
        return LoginResponse(token=token)

    @app.post("/api/sessions", response_model=CreateSessionResponse)
    def create_session(
        body: CreateSessionRequest, user: str = Depends(require_user)
    ) -> CreateSessionResponse:
        try:
            coordinator = hub.create_session(
                body.name,
                body.gridCols or config.default_grid_cols,
                body.gridRows or config.default_grid_rows,
            )
        except CommandRejected as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return CreateSessionResponse(sessionId=coordinator.session_id)

    @app.get("/api/sessions", response_model=list[SessionSummary])
    def list_sessions(user: str = Depends(require_user)) -> list[SessionSummary]:
        return [SessionSummary(**summary) for summary in hub.summaries()]

    @app.get("/api/sessions/{session_id}", response_model=SessionMetadata)
    def session_metadata(
        session_id: str, user: str = Depends(require_user)
    ) -> SessionMetadata:
        coordinator = lookup(session_id)
        summary = coordinator.summary()
        state = coordinator.state
        return SessionMetadata(
            **summary,
            version=state.version,
            activeWallId=state.active_wall_id,
            walls=[WallBrief(id=w.id, name=w.name) for w in state.walls],
            wallPixelWidth=config.wall_pixel_width,
            wallPixelHeight=config.wall_pixel_height,
        )

    @app.post("/api/sessions/{session_id}/files", response_model=UploadResponse)
    async def upload_file(
        session_id: str, file: UploadFile, user: str = Depends(require_user)
    ) -> UploadResponse:
        lookup(session_id)
        kind = infer_content_kind(file.content_type, file.filename or "")
        if kind is None:
            raise HTTPException(
                status_code=415,
                detail=f"cannot infer content kind of {file.filename!r}",
            )
        limit = config.upload_limit_bytes
        data = await file.read(limit + 1)
        if len(data) > limit:
            raise HTTPException(status_code=413, detail=f"upload exceeds {limit} bytes")
        digest = blobs.put(
            data, file.content_type or "application/octet-stream", file.filename or ""
        )
        descriptor = ContentDescriptor(
            kind=kind.value,
            source={"file": digest},
            title=file.filename or digest,
        )
        return UploadResponse(contentDescriptor=descriptor)

    @app.get("/api/files/{digest}")
    def download_file(digest: str, user: str = Depends(require_user)) -> Response:
        found = blobs.get(digest)
        if found is None:
            raise HTTPException(status_code=404, detail=f"no blob {digest!r}")
        data, meta = found
        return Response(content=data, media_type=meta["mediaType"])

    @app.get("/api/sessions/{session_id}/export")
    def export_session(session_id: str, user: str = Depends(require_user)) -> Response:
        coordinator = lookup(session_id)
        return Response(
            content=coordinator.export_text(), media_type="application/json"
        )

    @app.websocket("/api/sessions/{session_id}/channel")
    async def channel(websocket: WebSocket, session_id: str) -> None:
        token = websocket.query_params.get("token", "")
        if authenticator.resolve(token) is None:
            await websocket.close(code=4401)  # AuthFailed
            return
        coordinator = hub.get(session_id)
        if coordinator is None:
            await websocket.close(code=4404)  # NoSuchSession
            return
        await websocket.accept()
        loop = asyncio.get_running_loop()
        outbox: asyncio.Queue[str | None] = asyncio.Queue()

        class _Link:
            def deliver(self, text: str) -> None:
                loop.call_soon_threadsafe(outbox.put_nowait, text)

            def close(self) -> None:
                loop.call_soon_threadsafe(outbox.put_nowait, None)

        conn = coordinator.open_connection(_Link())

        async def pump() -> None:
            while True:
                item = await outbox.get()
                if item is None:
                    break
                await websocket.send_text(item)
            with contextlib.suppress(Exception):
                await websocket.close()

        sender = asyncio.create_task(pump())
        try:
            while True:
                text = await websocket.receive_text()
                coordinator.on_text(conn, text)
        except WebSocketDisconnect:
            pass
        finally:
            coordinator.drop_connection(conn)
            if not sender.done():
                outbox.put_nowait(None)
            with contextlib.suppress(Exception):
                await sender

    ui_dir = config.ui_dir
    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
