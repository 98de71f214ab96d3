"""A headless protocol client with a live replica of the session."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from ..canonical import canonical_text
from ..session import Command, Event, Session, apply_event
from ..sync import PROTOCOL_VERSION, envelope


@dataclass
class ClientStats:
    commands_sent: int = 0
    events_seen: int = 0
    rejects: dict = field(default_factory=dict)
    cursors_received: int = 0
    cursor_last: dict | None = None
    cursor_actions: dict = field(default_factory=dict)
    presence_seen: int = 0
    pings_answered: int = 0
    snapshots_seen: int = 0


class SimClient:
    """One simulated participant: sends commands, replays events, tracks
    outcomes per requestId, and answers heartbeats."""

    def __init__(self, name: str, session_id: str, token: str, role: str):
        self.name = name
        self.session_id = session_id
        self.token = token
        self.role = role
        self.transport = None
        self.participant_id: str | None = None
        self.replica: Session | None = None
        self.last_seq = 0
        self.pending: dict[str, dict] = {}  # requestId -> command payload
        self.outcomes: dict[str, tuple[str, dict]] = {}
        self.event_log: list[dict] = []  # every Event envelope this client saw
        self.protocol_errors: list[str] = []
        self.stats = ClientStats()
        self._request_counter = 0

    # -- connection ----------------------------------------------------------

    def attach(self, transport, resync: bool = False) -> None:
        """Bind a transport and say Hello; resync resumes from last_seq."""
        self.transport = transport
        payload = {
            "token": self.token,
            "role": self.role,
            "protoVersion": PROTOCOL_VERSION,
        }
        if resync:
            payload["lastAckedSeq"] = self.last_seq
        self._send(envelope("Hello", self.session_id, payload=payload))

    def detach(self) -> None:
        if self.transport is not None:
            self.transport.close()
            self.transport = None

    @property
    def connected(self) -> bool:
        return self.transport is not None and not self.transport.closed

    # -- sending ---------------------------------------------------------------

    def next_request_id(self) -> str:
        self._request_counter += 1
        return f"{self.name}-r{self._request_counter}"

    def send_command(self, variant: str, args: dict,
                     request_id: str | None = None) -> str:
        request_id = request_id or self.next_request_id()
        payload = Command(variant, args).to_dict()
        self.pending[request_id] = payload
        self.stats.commands_sent += 1
        self._send(envelope(
            "Command", self.session_id,
            sender_id=self.participant_id, request_id=request_id, payload=payload))
        return request_id

    def resend(self, request_id: str) -> None:
        """Retry a command verbatim (duplicate delivery, same requestId)."""
        payload = self.pending.get(request_id)
        if payload is None:
            raise KeyError(f"unknown requestId {request_id}")
        self._send(envelope(
            "Command", self.session_id,
            sender_id=self.participant_id, request_id=request_id, payload=payload))

    def send_cursor(self, x: float, y: float, action: str = "Move",
                    wall_id: str | None = None) -> None:
        self._send(envelope(
            "Cursor", self.session_id, sender_id=self.participant_id,
            payload={"x": x, "y": y, "action": action, "wallId": wall_id}))

    def _send(self, env: dict) -> None:
        assert self.transport is not None, f"client {self.name} is detached"
        self.transport.send(canonical_text(env))

    # -- receiving ---------------------------------------------------------------

    def drain(self, timeout: float = 0.0, max_frames: int | None = None) -> int:
        """Process queued inbound frames; returns how many were handled."""
        if self.transport is None:
            return 0
        handled = 0
        while max_frames is None or handled < max_frames:
            frame = self.transport.receive(timeout=timeout)
            if frame is None:
                break
            self._handle(json.loads(frame))
            handled += 1
        return handled

    def _handle(self, env: dict) -> None:
        etype = env.get("type")
        payload = env.get("payload") or {}
        if etype == "Welcome":
            self.participant_id = payload.get("participantId")
        elif etype == "Snapshot":
            self.replica = Session.from_dict(payload["state"])
            self.last_seq = payload["version"]
            self.stats.snapshots_seen += 1
        elif etype == "Event":
            self._apply_event(env, payload)
        elif etype == "Reject":
            request_id = env.get("requestId")
            reason = payload.get("reason", "?")
            self.stats.rejects[reason] = self.stats.rejects.get(reason, 0) + 1
            if request_id:
                self.outcomes[request_id] = ("reject", payload)
        elif etype == "Cursor":
            self.stats.cursors_received += 1
            self.stats.cursor_last = payload
            action = payload.get("action", "?")
            self.stats.cursor_actions[action] = (
                self.stats.cursor_actions.get(action, 0) + 1
            )
        elif etype == "Presence":
            self.stats.presence_seen += 1
        elif etype == "Ping":
            self.stats.pings_answered += 1
            self._send(envelope("Pong", self.session_id, payload=payload))

    def _apply_event(self, env: dict, payload: dict) -> None:
        seq = env.get("seq")
        if not isinstance(seq, int):
            self.protocol_errors.append(f"event without seq: {env}")
            return
        if seq <= self.last_seq:
            return  # duplicate delivery is legal during resync
        if seq != self.last_seq + 1:
            self.protocol_errors.append(
                f"gap: event seq {seq} after {self.last_seq}"
            )
            return
        event = Event(
            seq=seq,
            actor_id=env.get("senderId") or "",
            server_time=payload["serverTime"],
            request_id=env.get("requestId"),
            command=Command.from_dict(payload["command"]),
            result=dict(payload.get("result", {})),
        )
        if self.replica is None:
            self.protocol_errors.append("event before snapshot")
            return
        self.replica = apply_event(self.replica, event)
        self.last_seq = seq
        self.stats.events_seen += 1
        self.event_log.append(env)
        request_id = env.get("requestId")
        if request_id and request_id in self.pending:
            self.outcomes[request_id] = ("event", {"seq": seq})

    # -- inspection -----------------------------------------------------------------

    def canonical_state(self) -> str:
        assert self.replica is not None, f"client {self.name} has no replica"
        return canonical_text(self.replica.to_dict())
