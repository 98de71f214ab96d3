"""Server-authoritative session coordination.

One coordinator per session serializes every command into a single ordered
stream, applies the reducer, journals the event (write-ahead), then broadcasts
it to every connected client including the sender; the sender recognizes its
own requestId in the echoed event. Ephemeral cursor traffic bypasses the
command path entirely: it is relayed per owner with rate-limited coalescing
and never touches versioned state.

Transports are pluggable: anything that can deliver text frames and feed
inbound frames to ``Connection.on_text`` can carry the protocol (WebSockets in
production, loopback links in the simulation harness). The first frame on any
connection must be a Hello envelope carrying a gateway-issued token.
"""

from __future__ import annotations

import secrets
import threading
import time
from collections import OrderedDict
from dataclasses import dataclass
from typing import Callable, Protocol

from .canonical import canonical_text, state_hash
from .errors import CommandRejected, Reason, StorageUnavailable
from .persistence import FileStorage, SessionStore, list_session_ids
from .session import (
    Command,
    CommandMeta,
    Role,
    Session,
    apply_command,
    new_session,
)

PROTOCOL_VERSION = 1

ENVELOPE_TYPES = (
    "Hello",
    "Welcome",
    "Snapshot",
    "Command",
    "Event",
    "Reject",
    "Cursor",
    "Presence",
    "Ping",
    "Pong",
)

CURSOR_ACTIONS = ("Move", "Down", "Up", "Click")


def envelope(
    type_: str,
    session_id: str,
    *,
    sender_id: str | None = None,
    request_id: str | None = None,
    seq: int | None = None,
    payload: dict | None = None,
) -> dict:
    return {
        "type": type_,
        "sessionId": session_id,
        "senderId": sender_id,
        "requestId": request_id,
        "seq": seq,
        "payload": payload or {},
    }


class ClientLink(Protocol):
    """Outbound half of a client connection; must be thread-safe."""

    def deliver(self, text: str) -> None: ...

    def close(self) -> None: ...


class Authenticator(Protocol):
    def resolve(self, token: str) -> str | None:
        """Token to user name, or None when unknown or expired."""
        ...


@dataclass
class SyncSettings:
    heartbeat_interval: float = 5.0
    heartbeat_miss_limit: int = 3
    max_cursor_rate: float = 60.0
    dedup_size: int = 256
    dedup_seconds: float = 60.0
    snapshot_every_events: int = 500
    snapshot_every_seconds: float = 60.0


class _CursorGate:
    """Per-owner last-writer-wins coalescing of Move updates."""

    def __init__(self, min_interval: float):
        self.min_interval = min_interval
        self.last_sent = -1e18
        self.pending: str | None = None

    def offer_move(self, text: str, now: float) -> str | None:
        if now - self.last_sent >= self.min_interval:
            self.last_sent = now
            self.pending = None
            return text
        self.pending = text
        return None

    def flush(self, now: float) -> str | None:
        if self.pending is not None and now - self.last_sent >= self.min_interval:
            text, self.pending = self.pending, None
            self.last_sent = now
            return text
        return None


class _Connection:
    def __init__(self, conn_id: str, link: ClientLink, now: float):
        self.id = conn_id
        self.link = link
        self.participant_id: str | None = None
        self.display_name: str | None = None
        self.role: Role = Role.PERSONAL_DEVICE
        self.active = False  # becomes True after a valid Hello
        self.last_seen = now
        self.last_ping = now
        # requestId -> (arrival time, outcome frame); bounded, see _prune_dedup
        self.dedup: OrderedDict[str, tuple[float, str]] = OrderedDict()


class SessionCoordinator:
    """The single authority for one session's replicated state."""

    def __init__(
        self,
        state: Session,
        store: SessionStore,
        authenticator: Authenticator,
        settings: SyncSettings,
        clock: Callable[[], float],
        backlog: list | None = None,
    ):
        self.state = state
        self.store = store
        self.auth = authenticator
        self.settings = settings
        self.clock = clock
        self.last_active = self._now_ms()
        self._lock = threading.RLock()
        self._conns: dict[str, _Connection] = {}
        self._gates: dict[str, _CursorGate] = {}
        self._conn_counter = 0
        self._events_since_snapshot = 0
        self._last_snapshot_time = clock()
        self._last_snapshot_version = state.version
        # mirror of the journal's retained tail, for cheap reconnect backlogs
        self._backlog: list = list(backlog or [])
        self._backlog_start = self._backlog[0].seq if self._backlog else state.version + 1

    # -- basics --------------------------------------------------------------

    @property
    def session_id(self) -> str:
        return self.state.id

    def _now_ms(self) -> int:
        return int(self.clock() * 1000)

    def export_text(self) -> str:
        with self._lock:
            return canonical_text(self.state.to_dict())

    def export_hash(self) -> str:
        with self._lock:
            return state_hash(self.state.to_dict())

    def connected_participants(self) -> set[str]:
        with self._lock:
            return {
                c.participant_id
                for c in self._conns.values()
                if c.active and c.participant_id
            }

    def summary(self) -> dict:
        with self._lock:
            return {
                "id": self.state.id,
                "name": self.state.name,
                "lastActive": self.last_active,
                "participantCount": len(self.connected_participants()),
            }

    # -- connection lifecycle --------------------------------------------------

    def open_connection(self, link: ClientLink) -> _Connection:
        with self._lock:
            self._conn_counter += 1
            conn = _Connection(f"conn{self._conn_counter}", link, self.clock())
            self._conns[conn.id] = conn
            return conn

    def on_text(self, conn: _Connection, text: str) -> None:
        """Entry point for every inbound frame of one connection."""
        import json

        try:
            data = json.loads(text)
            if not isinstance(data, dict):
                raise ValueError("frame is not an object")
        except ValueError:
            self._send(conn, envelope("Reject", self.session_id,
                                      payload={"reason": str(Reason.MALFORMED),
                                               "detail": "frame is not valid JSON"}))
            return
        self.on_envelope(conn, data)

    def on_envelope(self, conn: _Connection, data: dict) -> None:
        with self._lock:
            conn.last_seen = self.clock()
            etype = data.get("type")
            if etype == "Hello":
                self._handle_hello(conn, data)
                return
            if not conn.active:
                self._reject(conn, data.get("requestId"), Reason.AUTH_FAILED,
                             "say Hello first")
                self.drop_connection(conn)
                return
            if etype == "Command":
                self._process_command(conn, data)
            elif etype == "Cursor":
                self._relay_cursor(conn, data)
            elif etype == "Pong":
                pass  # last_seen already refreshed
            elif etype == "Ping":
                self._send(conn, envelope("Pong", self.session_id,
                                          payload=data.get("payload") or {}))
            else:
                self._reject(conn, data.get("requestId"), Reason.MALFORMED,
                             f"unsupported envelope type {etype!r}")

    def _handle_hello(self, conn: _Connection, data: dict) -> None:
        payload = data.get("payload") or {}
        proto = payload.get("protoVersion", PROTOCOL_VERSION)
        if proto != PROTOCOL_VERSION:
            self._reject(conn, None, Reason.MALFORMED,
                         f"protocol {proto} unsupported, speak {PROTOCOL_VERSION}")
            self.drop_connection(conn)
            return
        token = payload.get("token")
        user = self.auth.resolve(token) if isinstance(token, str) else None
        if user is None:
            self._reject(conn, None, Reason.AUTH_FAILED, "invalid or expired token")
            self.drop_connection(conn)
            return
        role_raw = payload.get("role", Role.PERSONAL_DEVICE.value)
        try:
            role = Role(role_raw)
        except ValueError:
            self._reject(conn, None, Reason.MALFORMED, f"unknown role {role_raw!r}")
            self.drop_connection(conn)
            return
        conn.participant_id = f"p-{user}"
        conn.display_name = user
        conn.role = role
        conn.active = True

        self._send(conn, envelope(
            "Welcome", self.session_id, sender_id=None,
            payload={
                "participantId": conn.participant_id,
                "heartbeatInterval": self.settings.heartbeat_interval,
                "protoVersion": PROTOCOL_VERSION,
            }))

        last_acked = payload.get("lastAckedSeq")
        if (
            isinstance(last_acked, int)
            and not isinstance(last_acked, bool)
            and last_acked + 1 >= self._backlog_start
        ):
            for event in self._backlog:  # replay the retained tail, oldest first
                if event.seq > last_acked:
                    self._send(conn, self._event_envelope(event))
        else:
            self._send(conn, envelope(
                "Snapshot", self.session_id,
                payload={"state": self.state.to_dict(), "version": self.state.version}))

        # presence is versioned state: the join is a real command, echoed to all
        self._apply_internal(conn.participant_id, "JoinParticipant", {
            "participantId": conn.participant_id,
            "displayName": conn.display_name,
            "role": role.value,
        })
        self._broadcast_presence()

    def drop_connection(self, conn: _Connection) -> None:
        """Remove a connection; the last link of a participant marks them gone."""
        with self._lock:
            existed = self._conns.pop(conn.id, None)
            try:
                conn.link.close()
            except Exception:
                pass
            if existed is None or not conn.active:
                return
            conn.active = False
            pid = conn.participant_id
            if pid and pid not in self.connected_participants():
                participant = self.state.participants.get(pid)
                if participant is not None and participant.connected:
                    self._apply_internal(pid, "LeaveParticipant",
                                         {"participantId": pid})
            self._broadcast_presence()

    # -- command path ---------------------------------------------------------

    def _process_command(self, conn: _Connection, data: dict) -> None:
        request_id = data.get("requestId")
        if not isinstance(request_id, str) or not request_id:
            self._reject(conn, None, Reason.MALFORMED, "commands need a requestId")
            return
        remembered = conn.dedup.get(request_id)
        if remembered is not None:
            conn.link.deliver(remembered[1])  # replay original outcome verbatim
            return
        try:
            command = Command.from_dict(data.get("payload"))
        except CommandRejected as exc:
            self._remember_and_reject(conn, request_id, exc.reason, exc.detail)
            return
        meta = CommandMeta(
            actor_id=conn.participant_id or "",
            server_time=self._now_ms(),
            request_id=request_id,
        )
        try:
            new_state, event = apply_command(self.state, command, meta)
        except CommandRejected as exc:
            self._remember_and_reject(conn, request_id, exc.reason, exc.detail)
            return
        try:
            self.store.append_event(event)  # write-ahead: durable before broadcast
        except StorageUnavailable as exc:
            # transient infra failure: reject but let an identical retry re-apply
            self._reject(conn, request_id, Reason.STORAGE_UNAVAILABLE, str(exc))
            return
        self.state = new_state
        self.last_active = event.server_time
        self._backlog.append(event)
        text = canonical_text(self._event_envelope(event))
        self._remember(conn, request_id, text)
        self._broadcast_text(text)
        self._events_since_snapshot += 1
        if self._events_since_snapshot >= self.settings.snapshot_every_events:
            self._write_snapshot()

    def _apply_internal(self, actor_id: str, variant: str, args: dict) -> None:
        """Server-initiated commands (join/leave) share the client code path."""
        meta = CommandMeta(actor_id=actor_id, server_time=self._now_ms())
        try:
            new_state, event = apply_command(self.state, Command(variant, args), meta)
        except CommandRejected:
            return  # e.g. leave for an unknown participant; nothing to record
        try:
            self.store.append_event(event)
        except StorageUnavailable:
            return  # presence change lost; clients resync on reconnect
        self.state = new_state
        self.last_active = event.server_time
        self._backlog.append(event)
        self._broadcast(self._event_envelope(event))
        self._events_since_snapshot += 1
        if self._events_since_snapshot >= self.settings.snapshot_every_events:
            self._write_snapshot()

    def _event_envelope(self, event) -> dict:
        return envelope(
            "Event", self.session_id,
            sender_id=event.actor_id, request_id=event.request_id, seq=event.seq,
            payload={
                "serverTime": event.server_time,
                "command": event.command.to_dict(),
                "result": dict(event.result),
            })

    # -- cursors ---------------------------------------------------------------

    def _relay_cursor(self, conn: _Connection, data: dict) -> None:
        payload = data.get("payload") or {}
        x, y = payload.get("x"), payload.get("y")
        action = payload.get("action")
        if (
            not isinstance(x, (int, float)) or isinstance(x, bool)
            or not isinstance(y, (int, float)) or isinstance(y, bool)
            or not (0 <= x <= 1) or not (0 <= y <= 1)
            or action not in CURSOR_ACTIONS
        ):
            return  # lossy channel: out-of-contract updates vanish silently
        out = envelope(
            "Cursor", self.session_id, sender_id=conn.participant_id,
            payload={
                "ownerId": conn.participant_id,
                "label": conn.display_name,
                "x": x, "y": y,
                "action": action,
                "wallId": payload.get("wallId") or self.state.active_wall_id,
            })
        text = canonical_text(out)
        gate = self._gates.setdefault(
            conn.participant_id or conn.id,
            _CursorGate(1.0 / self.settings.max_cursor_rate),
        )
        now = self.clock()
        if action == "Move":
            ready = gate.offer_move(text, now)
            if ready is not None:
                self._fan_out_cursor(conn, ready)
        else:
            gate.pending = None  # the action carries the newest position
            self._fan_out_cursor(conn, text)

    def _fan_out_cursor(self, sender: _Connection, text: str) -> None:
        for other in list(self._conns.values()):
            if other.id != sender.id and other.active:
                try:
                    other.link.deliver(text)
                except Exception:
                    pass

    def flush_cursors(self) -> None:
        with self._lock:
            now = self.clock()
            for owner, gate in self._gates.items():
                text = gate.flush(now)
                if text is not None:
                    for conn in list(self._conns.values()):
                        if conn.active and conn.participant_id != owner:
                            try:
                                conn.link.deliver(text)
                            except Exception:
                                pass

    # -- presence and heartbeat --------------------------------------------------

    def _broadcast_presence(self) -> None:
        roster = [
            self.state.participants[pid].to_dict()
            for pid in sorted(self.state.participants)
        ]
        self._broadcast(envelope("Presence", self.session_id,
                                 payload={"participants": roster}))

    def tick(self) -> None:
        """Periodic maintenance: pings, liveness timeouts, cursor flush,
        time-based snapshots. Harness and tests drive this explicitly."""
        with self._lock:
            now = self.clock()
            interval = self.settings.heartbeat_interval
            timeout = interval * self.settings.heartbeat_miss_limit
            stale = [c for c in list(self._conns.values())
                     if c.active and now - c.last_seen > timeout]
            for conn in stale:
                self.drop_connection(conn)
            for conn in list(self._conns.values()):
                if conn.active and now - conn.last_ping >= interval:
                    conn.last_ping = now
                    self._send(conn, envelope("Ping", self.session_id,
                                              payload={"t": self._now_ms()}))
            self.flush_cursors()
            if (
                self.state.version > self._last_snapshot_version
                and now - self._last_snapshot_time >= self.settings.snapshot_every_seconds
            ):
                self._write_snapshot()

    def _write_snapshot(self) -> None:
        try:
            cutoff = self.store.snapshot_and_compact(self.state, self._now_ms())
        except StorageUnavailable:
            return  # journal still has everything; retry on a later tick
        self._events_since_snapshot = 0
        self._last_snapshot_time = self.clock()
        self._last_snapshot_version = self.state.version
        if cutoff is not None:
            self._backlog = [e for e in self._backlog if e.seq > cutoff]
            self._backlog_start = cutoff + 1

    def close(self) -> None:
        with self._lock:
            for conn in list(self._conns.values()):
                self._conns.pop(conn.id, None)
                try:
                    conn.link.close()
                except Exception:
                    pass
            self.store.close()

    # -- plumbing -----------------------------------------------------------------

    def _send(self, conn: _Connection, env: dict) -> None:
        try:
            conn.link.deliver(canonical_text(env))
        except Exception:
            pass

    def _broadcast(self, env: dict) -> None:
        self._broadcast_text(canonical_text(env))

    def _broadcast_text(self, text: str) -> None:
        for conn in list(self._conns.values()):
            if conn.active:
                try:
                    conn.link.deliver(text)
                except Exception:
                    pass

    def _reject(self, conn: _Connection, request_id: str | None,
                reason: Reason, detail: str) -> None:
        self._send(conn, envelope(
            "Reject", self.session_id, request_id=request_id,
            payload={"reason": str(reason), "detail": detail}))

    def _remember(self, conn: _Connection, request_id: str, outcome: str) -> None:
        conn.dedup[request_id] = (self.clock(), outcome)
        self._prune_dedup(conn)

    def _remember_and_reject(self, conn: _Connection, request_id: str,
                             reason: Reason, detail: str) -> None:
        frame = envelope("Reject", self.session_id, request_id=request_id,
                         payload={"reason": str(reason), "detail": detail})
        self._remember(conn, request_id, canonical_text(frame))
        conn.link.deliver(canonical_text(frame))

    def _prune_dedup(self, conn: _Connection) -> None:
        # keep the newest `dedup_size` entries plus anything younger than the window
        now = self.clock()
        while len(conn.dedup) > self.settings.dedup_size:
            oldest_id, (stamp, _) = next(iter(conn.dedup.items()))
            if now - stamp < self.settings.dedup_seconds:
                break
            conn.dedup.pop(oldest_id)


class Hub:
    """Registry of live session coordinators over one storage root."""

    def __init__(
        self,
        backend: FileStorage,
        authenticator: Authenticator,
        settings: SyncSettings | None = None,
        clock: Callable[[], float] | None = None,
        deterministic_ids: bool = False,
    ):
        self.backend = backend
        self.auth = authenticator
        self.settings = settings or SyncSettings()
        self.clock = clock or time.time
        self.deterministic_ids = deterministic_ids
        self._sessions: dict[str, SessionCoordinator] = {}
        self._id_counter = 0
        self._lock = threading.Lock()

    def _new_session_id(self) -> str:
        self._id_counter += 1
        if self.deterministic_ids:
            return f"s-{self._id_counter}"
        return f"s-{secrets.token_hex(4)}"

    def create_session(self, name: str, grid_cols: int | None = None,
                       grid_rows: int | None = None) -> SessionCoordinator:
        with self._lock:
            session_id = self._new_session_id()
            state = new_session(
                name,
                grid_cols or 12,
                grid_rows or 12,
                session_id=session_id,
            )
            store = SessionStore(self.backend, session_id)
            store.initialize(state, int(self.clock() * 1000))
            coordinator = SessionCoordinator(
                state, store, self.auth, self.settings, self.clock
            )
            self._sessions[session_id] = coordinator
            return coordinator

    def get(self, session_id: str) -> SessionCoordinator | None:
        with self._lock:
            coordinator = self._sessions.get(session_id)
            if coordinator is not None:
                return coordinator
            store = SessionStore(self.backend, session_id)
            if not store.exists():
                return None
            result = store.restore()
            coordinator = SessionCoordinator(
                result.session, store, self.auth, self.settings, self.clock,
                backlog=result.events,
            )
            self._sessions[session_id] = coordinator
            return coordinator

    def session_ids(self) -> list[str]:
        with self._lock:
            known = set(self._sessions)
        return sorted(known | set(list_session_ids(self.backend)))

    def summaries(self) -> list[dict]:
        out = []
        for session_id in self.session_ids():
            coordinator = self.get(session_id)
            if coordinator is not None:
                out.append(coordinator.summary())
        return out

    def tick(self) -> None:
        with self._lock:
            coordinators = list(self._sessions.values())
        for coordinator in coordinators:
            coordinator.tick()

    def close(self) -> None:
        with self._lock:
            for coordinator in self._sessions.values():
                coordinator.close()
            self._sessions.clear()
