"""Scenario execution, randomized fuzzing, audits, and reporting.

Random runs draw every choice (which client acts, what it does, whether it
drains its inbox) from one seeded RNG, and the embedded server uses a stepping
clock and deterministic ids, so the same seed yields a byte-identical server
event log. Invariant audits run on a designated auditor replica after every
applied event; because events are deterministic reductions, the replica is
canonically the server state.
"""

from __future__ import annotations

import hashlib
import json
import random
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .. import layout
from ..errors import LayoutError
from ..session import (
    LAYOUT_VARIANTS,
    Command,
    ContentKind,
    Event,
    Session,
    session_violations,
)
from .client import SimClient
from .runtime import InProcessServer, RemoteServer

_ROLES = ("WallDisplay", "Tabletop", "PersonalDevice")


# ---------------------------------------------------------------------------
# Scenario description
# ---------------------------------------------------------------------------


@dataclass
class Scenario:
    seed: int = 1
    clients: int = 2
    commands: int = 50  # random-mode step count when no script is given
    script: list[dict] = field(default_factory=list)
    grid_cols: int | None = None
    grid_rows: int | None = None
    profile: str = "mixed"  # mixed | layout
    duplicate_rate: float = 0.0  # fraction of commands delivered twice
    drain_probability: float = 0.7  # chance a client drains after each step

    @classmethod
    def from_file(cls, path: str | Path) -> "Scenario":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in data.items() if k in known})


@dataclass
class Report:
    mode: str = ""
    session_id: str = ""
    converged: bool = True
    divergence: str | None = None
    server_version: int = 0
    events_observed: int = 0
    commands_sent: int = 0
    rejects: Counter = field(default_factory=Counter)
    cursors_sent: int = 0
    cursors_received: int = 0
    invariant_problems: list = field(default_factory=list)
    protocol_errors: list = field(default_factory=list)
    journal_sha256: str | None = None
    shrunk_prefix: list | None = None
    steps_run: int = 0

    @property
    def ok(self) -> bool:
        return (
            self.converged
            and not self.invariant_problems
            and not self.protocol_errors
        )

    def exit_code(self) -> int:
        return 0 if self.ok else 1

    def to_text(self) -> str:
        lines = [
            f"mode: {self.mode}",
            f"session: {self.session_id}",
            f"steps: {self.steps_run}",
            f"commands sent: {self.commands_sent}",
            f"server version: {self.server_version}",
            f"events observed: {self.events_observed}",
            "rejects: "
            + (
                " ".join(f"{k}={v}" for k, v in sorted(self.rejects.items()))
                or "none"
            ),
            f"cursors: sent={self.cursors_sent} received={self.cursors_received}",
        ]
        if self.journal_sha256:
            lines.append(f"journal sha256: {self.journal_sha256}")
        if self.invariant_problems:
            lines.append(f"invariant violations: {len(self.invariant_problems)}")
            for step, problems in self.invariant_problems[:5]:
                lines.append(f"  at step {step}: {problems[0]}")
        else:
            lines.append("invariant audit: clean")
        if self.protocol_errors:
            lines.append(f"protocol errors: {self.protocol_errors[:3]}")
        if self.converged:
            lines.append("convergence: PASS")
        else:
            lines.append(f"convergence: FAIL ({self.divergence})")
        if self.shrunk_prefix is not None:
            lines.append(f"minimal reproducing prefix: {len(self.shrunk_prefix)} steps")
            for step in self.shrunk_prefix:
                lines.append(f"  {json.dumps(step, sort_keys=True)}")
        lines.append(f"verdict: {'PASS' if self.ok else 'FAIL'}")
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# Canonical diffing (first differing path, for divergence reports)
# ---------------------------------------------------------------------------


def first_difference(a, b, path: str = "$") -> str | None:
    if type(a) is not type(b):
        return f"{path}: type {type(a).__name__} != {type(b).__name__}"
    if isinstance(a, dict):
        for key in sorted(set(a) | set(b)):
            if key not in a:
                return f"{path}.{key}: missing on left"
            if key not in b:
                return f"{path}.{key}: missing on right"
            found = first_difference(a[key], b[key], f"{path}.{key}")
            if found:
                return found
        return None
    if isinstance(a, list):
        if len(a) != len(b):
            return f"{path}: length {len(a)} != {len(b)}"
        for i, (xa, xb) in enumerate(zip(a, b)):
            found = first_difference(xa, xb, f"{path}[{i}]")
            if found:
                return found
        return None
    if a != b:
        return f"{path}: {a!r} != {b!r}"
    return None


# ---------------------------------------------------------------------------
# Invariant audits
# ---------------------------------------------------------------------------


def _wall_multisets(state: Session) -> dict[str, Counter]:
    return {wall.id: wall.content_ids() for wall in state.walls}


def transition_problems(before: Session, after: Session, event: Event) -> list[str]:
    """Referential integrity plus content conservation for one transition."""
    problems = session_violations(after)
    for content_id in before.contents:
        if content_id not in after.contents:
            problems.append(f"content {content_id} vanished from the registry")
    if event.command.variant in LAYOUT_VARIANTS:
        walls_before = _wall_multisets(before)
        walls_after = _wall_multisets(after)
        extra: tuple[str, str] | None = None
        if event.command.variant == "InsertView":
            content_id = event.command.args.get("contentId")
            if content_id:
                extra = (event.result.get("wallId", ""), content_id)
        for wall_id in set(walls_before) | set(walls_after):
            expected = Counter(walls_before.get(wall_id, Counter()))
            if extra is not None and extra[0] == wall_id:
                expected[extra[1]] += 1
            if walls_after.get(wall_id, Counter()) != expected:
                problems.append(
                    f"{event.command.variant} changed wall {wall_id} contents: "
                    f"{walls_before.get(wall_id)} -> {walls_after.get(wall_id)}"
                )
    return problems


class _Auditor:
    """Hooks one client's replica and audits every applied event."""

    def __init__(self, client: SimClient):
        self.problems: list[tuple[int, list[str]]] = []
        self.events_audited = 0
        original = client._apply_event

        def wrapped(env: dict, payload: dict) -> None:
            before = client.replica
            seq_before = client.last_seq
            original(env, payload)
            if client.last_seq > seq_before and before is not None:
                event = Event(
                    seq=client.last_seq,
                    actor_id=env.get("senderId") or "",
                    server_time=payload["serverTime"],
                    request_id=env.get("requestId"),
                    command=Command.from_dict(payload["command"]),
                    result=dict(payload.get("result", {})),
                )
                found = transition_problems(before, client.replica, event)
                self.events_audited += 1
                if found:
                    self.problems.append((client.last_seq, found))

        client._apply_event = wrapped  # type: ignore[method-assign]


# ---------------------------------------------------------------------------
# Random command generation
# ---------------------------------------------------------------------------


class CommandGenerator:
    """Builds mostly-valid commands from a client's current replica.

    Mixed profile weights mirror observed meeting behaviour: half the traffic
    is layout manipulation, the rest spreads over content, notes, wall
    management, and participant churn.
    """

    def __init__(self, rng: random.Random, profile: str = "mixed"):
        self.rng = rng
        self.profile = profile
        self._counter = 0

    def _n(self) -> int:
        self._counter += 1
        return self._counter

    def build(self, client: SimClient) -> tuple[str, dict] | None:
        """Return (variant, args), or None to signal a churn step."""
        state = client.replica
        if state is None:
            return ("ApplyPreset", {"viewCount": 4, "variantIndex": 0})
        roll = self.rng.random()
        if self.profile == "layout":
            return self._layout(state)
        if roll < 0.50:
            return self._layout(state)
        if roll < 0.70:
            return self._content(state, client)
        if roll < 0.85:
            return self._note(state)
        if roll < 0.95:
            return self._wall(state)
        return None  # churn

    # -- builders -------------------------------------------------------------

    def _pick_wall(self, state: Session):
        if len(state.walls) > 1 and self.rng.random() < 0.25:
            return self.rng.choice(state.walls)
        return state.active_wall()

    def _layout(self, state: Session) -> tuple[str, dict]:
        wall = self._pick_wall(state)
        roll = self.rng.random()
        if roll < 0.16:
            count = self.rng.randint(1, 9)
            catalog = layout.preset_catalog(count, wall.grid_cols, wall.grid_rows)
            return ("ApplyPreset", {
                "wallId": wall.id,
                "viewCount": count,
                "variantIndex": self.rng.randrange(len(catalog)),
            })
        if roll < 0.22:
            return ("ApplyCustomLayout", {
                "wallId": wall.id,
                "rects": [r.to_dict() for r in self._random_rects(wall)],
            })
        if roll < 0.42:
            return self._insert(state, wall)
        if roll < 0.66:
            return self._swap(wall)
        if roll < 0.76:
            return self._viewport_op(wall, "HideView")
        if roll < 0.84:
            return self._viewport_op(wall, "DeleteView")
        if roll < 0.92:
            return self._viewport_op(wall, "MaximizeView")
        return ("RestoreView", {"wallId": wall.id})

    def _random_rects(self, wall) -> list[layout.GridRect]:
        rects: list[layout.GridRect] = []
        target = self.rng.randint(1, 4)
        for _ in range(target * 4):
            if len(rects) >= target:
                break
            col = self.rng.randrange(wall.grid_cols)
            row = self.rng.randrange(wall.grid_rows)
            rect = layout.GridRect(
                col, row,
                self.rng.randint(1, wall.grid_cols - col),
                self.rng.randint(1, wall.grid_rows - row),
            )
            if all(not rect.overlaps(other) for other in rects):
                rects.append(rect)
        return rects or [layout.GridRect(0, 0, wall.grid_cols, wall.grid_rows)]

    def _insert(self, state: Session, wall) -> tuple[str, dict]:
        try:
            candidates = layout.enumerate_insert_candidates(wall)
        except LayoutError:
            if wall.maximized_viewport_id is not None:
                return ("RestoreView", {"wallId": wall.id})
            return ("ApplyPreset", {"wallId": wall.id, "viewCount": 2,
                                    "variantIndex": 0})
        candidate = self.rng.choice(candidates)
        args: dict = {"wallId": wall.id, "candidate": candidate.to_dict()}
        placed = wall.content_ids()
        loose = [cid for cid in sorted(state.contents) if cid not in placed]
        if loose and self.rng.random() < 0.5:
            args["contentId"] = self.rng.choice(loose)
        return ("InsertView", args)

    def _slots(self, wall) -> list[dict]:
        slots: list[dict] = [{"viewportId": vp.id} for vp in wall.viewports]
        slots.extend({"stackIndex": i} for i in range(len(wall.hidden_stack)))
        return slots

    def _swap(self, wall) -> tuple[str, dict]:
        slots = self._slots(wall)
        if not slots:
            return ("ApplyPreset", {"wallId": wall.id, "viewCount": 2,
                                    "variantIndex": 0})
        return ("SwapViews", {
            "wallId": wall.id,
            "slotA": self.rng.choice(slots),
            "slotB": self.rng.choice(slots),
        })

    def _viewport_op(self, wall, variant: str) -> tuple[str, dict]:
        if not wall.viewports:
            return ("ApplyPreset", {"wallId": wall.id, "viewCount": 2,
                                    "variantIndex": 0})
        pool = list(wall.viewports)
        if variant == "HideView":
            loaded = [vp for vp in pool if vp.content_id]
            if loaded and self.rng.random() < 0.8:
                pool = loaded
        return (variant, {"wallId": wall.id,
                          "viewportId": self.rng.choice(pool).id})

    def _content(self, state: Session, client: SimClient) -> tuple[str, dict]:
        roll = self.rng.random()
        if roll < 0.45 or not state.contents:
            return self._register(client)
        if roll < 0.80:
            return self._update_state(state)
        wall = self._pick_wall(state)
        if not wall.viewports:
            return self._register(client)
        viewport = self.rng.choice(wall.viewports)
        if self.rng.random() < 0.2:
            return ("SetViewportContent", {"wallId": wall.id,
                                           "viewportId": viewport.id,
                                           "contentId": None})
        content_id = self.rng.choice(sorted(state.contents))
        return ("SetViewportContent", {"wallId": wall.id,
                                       "viewportId": viewport.id,
                                       "contentId": content_id})

    def _register(self, client: SimClient) -> tuple[str, dict]:
        n = self._n()
        roll = self.rng.random()
        if roll < 0.35:
            kind, source = ContentKind.PDF, {"file": f"blob{n:04d}"}
        elif roll < 0.60:
            kind, source = ContentKind.IMAGE, {"file": f"blob{n:04d}"}
        elif roll < 0.72:
            kind, source = ContentKind.VIDEO, {"file": f"blob{n:04d}"}
        elif roll < 0.90:
            kind, source = ContentKind.WEB_LINK, {"url": f"https://docs.test/d{n}"}
        else:
            kind, source = ContentKind.SCREEN_SHARE, {"streamLabel": f"window {n}"}
        return ("RegisterContent", {"kind": kind.value, "source": source,
                                    "title": f"item {n}"})

    def _update_state(self, state: Session) -> tuple[str, dict]:
        content = state.contents[self.rng.choice(sorted(state.contents))]
        args: dict = {"contentId": content.id}
        roll = self.rng.random()
        if roll < 0.35 and content.kind is ContentKind.PDF:
            args["page"] = self.rng.randint(1, 40)
        elif roll < 0.55:
            args["zoom"] = round(self.rng.uniform(0.25, 4.0), 3)
        elif roll < 0.8:
            args["scrollX"] = round(self.rng.random(), 3)
            args["scrollY"] = round(self.rng.random(), 3)
        elif content.kind is ContentKind.VIDEO:
            args["playhead"] = round(self.rng.uniform(0, 7200), 2)
        else:
            args["zoom"] = round(self.rng.uniform(0.5, 2.0), 3)
        return ("UpdateContentState", args)

    def _note(self, state: Session) -> tuple[str, dict]:
        if state.notes and self.rng.random() < 0.3:
            note = self.rng.choice(state.notes)
            return ("DeleteNote", {"noteId": note.id})
        if not state.contents:
            return ("RegisterContent", {
                "kind": "WebLink",
                "source": {"url": f"https://docs.test/d{self._n()}"},
                "title": "linked doc",
            })
        content_id = self.rng.choice(sorted(state.contents))
        return ("AddNote", {"contentId": content_id,
                            "text": f"observation {self._n()}"})

    def _wall(self, state: Session) -> tuple[str, dict]:
        roll = self.rng.random()
        if roll < 0.3 and len(state.walls) < 6:
            return ("CreateWall", {"name": f"Wall {self._n()}"})
        if roll < 0.8:
            wall = self.rng.choice(state.walls)
            return ("SwitchActiveWall", {"wallId": wall.id})
        wall = self.rng.choice(state.walls)
        return ("RenameWall", {"wallId": wall.id, "name": f"topic {self._n()}"})


# ---------------------------------------------------------------------------
# Run coordination
# ---------------------------------------------------------------------------


class _Run:
    def __init__(self, server, scenario: Scenario):
        self.server = server
        self.scenario = scenario
        self.rng = random.Random(scenario.seed)
        self.clients: list[SimClient] = []
        self.tokens: list[str] = []
        self.session_id = ""
        self.generator = CommandGenerator(self.rng, scenario.profile)
        self.auditor: _Auditor | None = None
        self.cursors_sent = 0
        self.trace: list[dict] = []  # concrete steps, replayable for shrinking

    # -- setup -------------------------------------------------------------

    def start(self) -> None:
        scenario = self.scenario
        for i in range(scenario.clients):
            name, secret = self.server.credentials(i)
            self.tokens.append(self.server.login(name, secret))
        self.session_id = self.server.create_session(
            f"sim seed {scenario.seed}", self.tokens[0],
            scenario.grid_cols, scenario.grid_rows,
        )
        for i in range(scenario.clients):
            role = _ROLES[0] if i == 0 else _ROLES[min(i, 2)]
            client = SimClient(f"client{i}", self.session_id, self.tokens[i], role)
            self.clients.append(client)
        self.auditor = _Auditor(self.clients[0])
        for client in self.clients:
            self._connect(client)
        self.drain_all()

    def _connect(self, client: SimClient, resync: bool = False) -> None:
        if isinstance(self.server, RemoteServer):
            transport = self.server.connect_transport(self.session_id, client.token)
        else:
            transport = self.server.connect_transport(self.session_id)
        client.attach(transport, resync=resync)

    # -- draining -----------------------------------------------------------

    def drain_all(self) -> None:
        for _ in range(10_000):
            handled = sum(c.drain() for c in self.clients if c.connected)
            if handled == 0:
                break

    def quiesce(self) -> None:
        if isinstance(self.server, RemoteServer):
            import time as _time

            deadline = _time.monotonic() + 10.0
            while _time.monotonic() < deadline:
                handled = sum(
                    c.drain(timeout=0.05) for c in self.clients if c.connected
                )
                if handled == 0:
                    break
        else:
            self.drain_all()

    # -- step execution ------------------------------------------------------

    def random_step(self, step_index: int) -> None:
        client = self.rng.choice([c for c in self.clients if c.connected])
        built = self.generator.build(client)
        if built is None:
            self.churn(client)
            return
        variant, args = built
        self.command_step(client, variant, args)

    def command_step(self, client: SimClient, variant: str, args: dict) -> None:
        request_id = client.send_command(variant, args)
        self.trace.append({
            "op": "command",
            "client": self.clients.index(client),
            "variant": variant,
            "args": args,
        })
        if self.scenario.duplicate_rate and (
            self.rng.random() < self.scenario.duplicate_rate
        ):
            client.resend(request_id)
            self.trace.append({"op": "resend",
                               "client": self.clients.index(client)})
        for other in self.clients:
            if other.connected and self.rng.random() < self.scenario.drain_probability:
                other.drain()

    def churn(self, client: SimClient) -> None:
        if sum(1 for c in self.clients if c.connected) <= 1:
            return  # keep at least one witness online
        index = self.clients.index(client)
        client.detach()
        self.trace.append({"op": "churn", "client": index})
        self._connect(client, resync=True)
        client.drain()

    def run_script(self) -> None:
        for step in self.scenario.script:
            op = step.get("op")
            if op == "command":
                client = self.clients[step.get("client", 0)]
                self.command_step(client, step["variant"], step.get("args", {}))
            elif op == "insertAuto":
                client = self.clients[step.get("client", 0)]
                client.drain()
                wall = client.replica.active_wall()
                candidates = layout.enumerate_insert_candidates(wall)
                choice = step.get("choice", 0) % len(candidates)
                args = {"wallId": wall.id,
                        "candidate": candidates[choice].to_dict()}
                if step.get("contentId"):
                    args["contentId"] = step["contentId"]
                self.command_step(client, "InsertView", args)
            elif op == "random":
                for i in range(step.get("count", 1)):
                    self.random_step(i)
            elif op == "cursorBurst":
                self.cursor_burst(step)
            elif op == "disconnect":
                self.clients[step.get("client", 0)].detach()
            elif op == "reconnect":
                client = self.clients[step.get("client", 0)]
                self._connect(client, resync=step.get("resync", True))
            elif op == "drain":
                self.drain_all()
            elif op == "tick":
                for _ in range(step.get("times", 1)):
                    self.server.tick()
            elif op == "advance":
                if hasattr(self.server, "clock"):
                    self.server.clock.advance(step.get("seconds", 1.0))
            elif op == "kill":
                self.server.kill()
                for client in self.clients:
                    if client.transport is not None:
                        client.transport.closed = True
                        client.transport = None
            elif op == "restart":
                self.server.restart()
                # tokens died with the old process: log in again, then resync
                for i, client in enumerate(self.clients):
                    name, secret = self.server.credentials(i)
                    self.tokens[i] = client.token = self.server.login(name, secret)
                    self._connect(client, resync=True)
            else:
                raise ValueError(f"unknown scenario op {op!r}")

    def cursor_burst(self, step: dict) -> None:
        client = self.clients[step.get("client", 0)]
        count = step.get("count", 100)
        action = step.get("action", "Move")
        spread = step.get("spreadSeconds", 1.0)
        wall_id = client.replica.active_wall_id if client.replica else None
        for i in range(count):
            if hasattr(self.server, "clock") and count > 1:
                self.server.clock.advance(spread / count)
            client.send_cursor(
                x=round((i + 1) / count, 6), y=0.5, action=action, wall_id=wall_id,
            )
            self.cursors_sent += 1
        self.server.tick()  # flush any pending coalesced update

    # -- reporting -------------------------------------------------------------

    def build_report(self, mode: str, steps_run: int) -> Report:
        report = Report(mode=mode, session_id=self.session_id, steps_run=steps_run)
        self.quiesce()
        export_text = self.server.export(self.session_id, self.tokens[0])
        server_doc = json.loads(export_text)
        report.server_version = server_doc.get("version", 0)
        for client in self.clients:
            report.commands_sent += client.stats.commands_sent
            report.events_observed = max(report.events_observed,
                                         client.stats.events_seen)
            report.rejects.update(client.stats.rejects)
            report.cursors_received += client.stats.cursors_received
            report.protocol_errors.extend(client.protocol_errors)
            if client.connected and client.replica is not None:
                difference = first_difference(server_doc,
                                              json.loads(client.canonical_state()))
                if difference is not None:
                    report.converged = False
                    report.divergence = f"{client.name}: {difference}"
        report.cursors_sent = self.cursors_sent
        if self.auditor is not None:
            report.invariant_problems = list(self.auditor.problems)
        report.invariant_problems.extend(
            (report.server_version, [p])
            for p in session_violations(Session.from_dict(server_doc))
        )
        if isinstance(self.server, InProcessServer):
            journal = Path(self.server.storage_root) / "sessions" / self.session_id / "journal.log"
            if journal.exists():
                report.journal_sha256 = hashlib.sha256(journal.read_bytes()).hexdigest()
        return report

    def teardown(self) -> None:
        for client in self.clients:
            if client.connected:
                client.detach()


# ---------------------------------------------------------------------------
# Entry points
# ---------------------------------------------------------------------------


def run_scenario(scenario: Scenario, server=None) -> Report:
    """Execute a scenario (scripted, or random when the script is empty)."""
    owned = server is None
    server = server or InProcessServer(user_count=max(scenario.clients, 2))
    mode = "in-process" if isinstance(server, InProcessServer) else "remote"
    run = _Run(server, scenario)
    try:
        run.start()
        if scenario.script:
            run.run_script()
            steps = len(scenario.script)
        else:
            for i in range(scenario.commands):
                run.random_step(i)
            steps = scenario.commands
        report = run.build_report(mode, steps)
    finally:
        run.teardown()
        if owned:
            server.shutdown()
    return report


def _prime_contents(run: _Run) -> None:
    """Before a layout-only run, stock the session with contents to move
    around; conservation checks are vacuous on an empty wall."""
    client = run.clients[0]
    generator = CommandGenerator(random.Random(run.scenario.seed ^ 0x5EED),
                                 profile="mixed")
    for _ in range(12):
        run.command_step(client, *generator._register(client))
    run.drain_all()
    run.command_step(client, "ApplyPreset", {"viewCount": 6, "variantIndex": 0})
    run.drain_all()
    wall = client.replica.active_wall()
    loose = sorted(client.replica.contents)
    for viewport, content_id in zip(wall.viewports, loose):
        run.command_step(client, "SetViewportContent", {
            "wallId": wall.id, "viewportId": viewport.id, "contentId": content_id,
        })
    run.drain_all()
    run.trace.clear()  # priming is setup, not part of the audited step count


def fuzz(
    seed: int,
    steps: int,
    clients: int = 2,
    profile: str = "mixed",
    server=None,
    shrink: bool = True,
) -> Report:
    """Randomized run with per-event invariant audits and prefix shrinking."""
    scenario = Scenario(seed=seed, clients=clients, commands=steps, profile=profile)
    owned = server is None
    server = server or InProcessServer(user_count=max(clients, 2))
    mode = "in-process" if isinstance(server, InProcessServer) else "remote"
    run = _Run(server, scenario)
    try:
        run.start()
        if profile == "layout":
            _prime_contents(run)
        executed = 0
        for i in range(steps):
            run.random_step(i)
            executed += 1
            if run.auditor and run.auditor.problems:
                break  # first violation ends the run; shrink reproduces it
        report = run.build_report(f"fuzz/{mode}", executed)
        if report.invariant_problems and shrink and isinstance(server, InProcessServer):
            report.shrunk_prefix = _shrink_prefix(run.trace, scenario)
    finally:
        run.teardown()
        if owned:
            server.shutdown()
    return report


def _replay_violates(trace: list[dict], scenario: Scenario) -> bool:
    server = InProcessServer(user_count=max(scenario.clients, 2))
    run = _Run(server, Scenario(seed=scenario.seed, clients=scenario.clients,
                                profile=scenario.profile))
    try:
        run.start()
        if scenario.profile == "layout":
            _prime_contents(run)
        last_request: dict[int, str] = {}
        for step in trace:
            index = step.get("client", 0)
            client = run.clients[index]
            if step["op"] == "command":
                if not client.connected:
                    run._connect(client, resync=True)
                request_id = client.send_command(step["variant"], step["args"])
                last_request[index] = request_id
            elif step["op"] == "resend":
                client.resend(last_request[index])
            elif step["op"] == "churn":
                client.detach()
                run._connect(client, resync=True)
            run.drain_all()
            if run.auditor and run.auditor.problems:
                return True
        return bool(run.auditor and run.auditor.problems)
    finally:
        run.teardown()
        server.shutdown()


def _shrink_prefix(trace: list[dict], scenario: Scenario) -> list[dict]:
    """Smallest failing prefix of the recorded step trace, by bisection."""
    low, high = 1, len(trace)  # invariant: trace[:high] fails
    while low < high:
        mid = (low + high) // 2
        if _replay_violates(trace[:mid], scenario):
            high = mid
        else:
            low = mid + 1
    return trace[:high]
