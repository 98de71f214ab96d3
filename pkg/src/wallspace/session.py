"""The replicated session aggregate and its deterministic command reducer.

A session is a versioned value: walls, content registry, notes, participants.
``apply_command`` is the single source of state transitions. It is a pure
function of (session, command, meta); all entity ids and timestamps are
derived from session state and the supplied meta, never from ambient clocks
or RNGs, so replaying the event log reproduces the live state bit for bit.

The server serializes all commands of one session into one ordered stream;
session values are immutable snapshots safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Callable

from . import layout
from .errors import CommandRejected, LayoutError, Reason
from .layout import GridRect, InsertCandidate, Viewport, VirtualWall

MAX_GRID = layout.MAX_GRID_CELLS_PER_AXIS


class ContentKind(str, Enum):
    PDF = "Pdf"
    IMAGE = "Image"
    VIDEO = "Video"
    WEB_LINK = "WebLink"
    SCREEN_SHARE = "ScreenShare"

    def __str__(self) -> str:
        return self.value


class Role(str, Enum):
    WALL_DISPLAY = "WallDisplay"
    TABLETOP = "Tabletop"
    PERSONAL_DEVICE = "PersonalDevice"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True, slots=True)
class ContentViewState:
    """Shared navigation state of one content item, synchronized to clients."""

    page: int = 1
    scroll_x: float = 0.0
    scroll_y: float = 0.0
    zoom: float = 1.0
    playhead: float = 0.0

    def to_dict(self) -> dict:
        return {
            "page": self.page,
            "scrollX": self.scroll_x,
            "scrollY": self.scroll_y,
            "zoom": self.zoom,
            "playhead": self.playhead,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ContentViewState":
        return cls(
            page=data["page"],
            scroll_x=data["scrollX"],
            scroll_y=data["scrollY"],
            zoom=data["zoom"],
            playhead=data["playhead"],
        )


@dataclass(frozen=True, slots=True)
class Content:
    id: str
    kind: ContentKind
    source: dict
    title: str
    uploader_id: str
    view_state: ContentViewState = ContentViewState()
    ended: bool = False  # a ScreenShare whose owner left; other kinds never end

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind.value,
            "source": dict(self.source),
            "title": self.title,
            "uploaderId": self.uploader_id,
            "viewState": self.view_state.to_dict(),
            "ended": self.ended,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Content":
        return cls(
            id=data["id"],
            kind=ContentKind(data["kind"]),
            source=dict(data["source"]),
            title=data["title"],
            uploader_id=data["uploaderId"],
            view_state=ContentViewState.from_dict(data["viewState"]),
            ended=data["ended"],
        )


@dataclass(frozen=True, slots=True)
class Note:
    id: str
    author_id: str
    content_id: str
    text: str
    created_at: int  # server ms since epoch

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "authorId": self.author_id,
            "contentId": self.content_id,
            "text": self.text,
            "createdAt": self.created_at,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Note":
        return cls(data["id"], data["authorId"], data["contentId"], data["text"], data["createdAt"])


@dataclass(frozen=True, slots=True)
class Participant:
    id: str
    display_name: str
    role: Role
    connected: bool = True

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "displayName": self.display_name,
            "role": self.role.value,
            "connected": self.connected,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Participant":
        return cls(data["id"], data["displayName"], Role(data["role"]), data["connected"])


@dataclass(frozen=True, slots=True)
class Session:
    id: str
    name: str
    walls: tuple[VirtualWall, ...]
    active_wall_id: str
    contents: dict[str, Content] = field(default_factory=dict)
    notes: tuple[Note, ...] = ()
    participants: dict[str, Participant] = field(default_factory=dict)
    version: int = 0
    default_grid_cols: int = layout.DEFAULT_GRID_COLS
    default_grid_rows: int = layout.DEFAULT_GRID_ROWS
    id_counter: int = 0  # monotone entity-id allocator; part of replicated state

    def wall(self, wall_id: str) -> VirtualWall | None:
        for wall in self.walls:
            if wall.id == wall_id:
                return wall
        return None

    def active_wall(self) -> VirtualWall:
        wall = self.wall(self.active_wall_id)
        assert wall is not None, "invariant: active wall always exists"
        return wall

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "version": self.version,
            "activeWallId": self.active_wall_id,
            "defaultGridCols": self.default_grid_cols,
            "defaultGridRows": self.default_grid_rows,
            "idCounter": self.id_counter,
            "walls": [w.to_dict() for w in self.walls],
            "contents": {cid: c.to_dict() for cid, c in self.contents.items()},
            "notes": [n.to_dict() for n in self.notes],
            "participants": {pid: p.to_dict() for pid, p in self.participants.items()},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Session":
        return cls(
            id=data["id"],
            name=data["name"],
            walls=tuple(VirtualWall.from_dict(w) for w in data["walls"]),
            active_wall_id=data["activeWallId"],
            contents={cid: Content.from_dict(c) for cid, c in data["contents"].items()},
            notes=tuple(Note.from_dict(n) for n in data["notes"]),
            participants={
                pid: Participant.from_dict(p) for pid, p in data["participants"].items()
            },
            version=data["version"],
            default_grid_cols=data["defaultGridCols"],
            default_grid_rows=data["defaultGridRows"],
            id_counter=data["idCounter"],
        )


@dataclass(frozen=True, slots=True)
class Command:
    variant: str
    args: dict

    def to_dict(self) -> dict:
        return {"variant": self.variant, "args": dict(self.args)}

    @classmethod
    def from_dict(cls, data: dict) -> "Command":
        if not isinstance(data, dict) or not isinstance(data.get("variant"), str):
            raise CommandRejected(Reason.MALFORMED, "command needs a variant")
        args = data.get("args", {})
        if not isinstance(args, dict):
            raise CommandRejected(Reason.MALFORMED, "command args must be an object")
        return cls(data["variant"], args)


@dataclass(frozen=True, slots=True)
class CommandMeta:
    actor_id: str
    server_time: int  # ms since epoch, server-assigned
    request_id: str | None = None


@dataclass(frozen=True, slots=True)
class Event:
    """A fully applied transition; replaying it reproduces the new state."""

    seq: int
    actor_id: str
    server_time: int
    request_id: str | None
    command: Command
    result: dict

    def to_dict(self) -> dict:
        return {
            "seq": self.seq,
            "actorId": self.actor_id,
            "serverTime": self.server_time,
            "requestId": self.request_id,
            "command": self.command.to_dict(),
            "result": dict(self.result),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Event":
        return cls(
            seq=data["seq"],
            actor_id=data["actorId"],
            server_time=data["serverTime"],
            request_id=data.get("requestId"),
            command=Command.from_dict(data["command"]),
            result=dict(data.get("result", {})),
        )


# ---------------------------------------------------------------------------
# Session construction
# ---------------------------------------------------------------------------


def new_session(
    name: str,
    grid_cols: int = layout.DEFAULT_GRID_COLS,
    grid_rows: int = layout.DEFAULT_GRID_ROWS,
    session_id: str = "s-0",
) -> Session:
    """A fresh session holding one empty wall at version 0."""
    if not isinstance(name, str) or not name.strip():
        raise CommandRejected(Reason.INVALID_NAME, "session name must be non-empty")
    _check_grid(grid_cols, grid_rows)
    wall = VirtualWall(id="w1", name="Wall 1", grid_cols=grid_cols, grid_rows=grid_rows)
    return Session(
        id=session_id,
        name=name,
        walls=(wall,),
        active_wall_id=wall.id,
        default_grid_cols=grid_cols,
        default_grid_rows=grid_rows,
        id_counter=1,
    )


def _check_grid(cols: Any, rows: Any) -> None:
    if (
        not isinstance(cols, int)
        or not isinstance(rows, int)
        or isinstance(cols, bool)
        or isinstance(rows, bool)
        or not (1 <= cols <= MAX_GRID)
        or not (1 <= rows <= MAX_GRID)
    ):
        raise CommandRejected(
            Reason.INVALID_GRID, f"grid must be 1..{MAX_GRID} cells per axis"
        )


# ---------------------------------------------------------------------------
# Argument helpers (wire payloads are untrusted)
# ---------------------------------------------------------------------------


def _want_str(args: dict, key: str, *, optional: bool = False) -> str | None:
    value = args.get(key)
    if value is None and optional:
        return None
    if not isinstance(value, str):
        raise CommandRejected(Reason.MALFORMED, f"field {key!r} must be a string")
    return value


def _want_int(args: dict, key: str, *, optional: bool = False) -> int | None:
    value = args.get(key)
    if value is None and optional:
        return None
    if isinstance(value, bool) or not isinstance(value, int):
        raise CommandRejected(Reason.MALFORMED, f"field {key!r} must be an integer")
    return value


def _want_number(args: dict, key: str) -> float:
    value = args.get(key)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise CommandRejected(Reason.MALFORMED, f"field {key!r} must be a number")
    return float(value)


def _parse_rect(data: Any) -> GridRect:
    if not isinstance(data, dict):
        raise CommandRejected(Reason.MALFORMED, "rect must be an object")
    try:
        rect = GridRect.from_dict(data)
    except (KeyError, TypeError) as exc:
        raise CommandRejected(Reason.MALFORMED, f"bad rect: {exc}") from exc
    for value in (rect.col, rect.row, rect.col_span, rect.row_span):
        if isinstance(value, bool) or not isinstance(value, int):
            raise CommandRejected(Reason.MALFORMED, "rect fields must be integers")
    return rect


def _parse_slot(data: Any) -> layout.Slot:
    if isinstance(data, dict):
        if isinstance(data.get("viewportId"), str):
            return data["viewportId"]
        idx = data.get("stackIndex")
        if isinstance(idx, int) and not isinstance(idx, bool):
            return idx
    raise CommandRejected(
        Reason.MALFORMED, "slot must be {'viewportId': str} or {'stackIndex': int}"
    )


def _find_wall(session: Session, args: dict) -> VirtualWall:
    wall_id = _want_str(args, "wallId", optional=True) or session.active_wall_id
    wall = session.wall(wall_id)
    if wall is None:
        raise CommandRejected(Reason.NO_SUCH_ENTITY, f"no wall {wall_id!r}")
    return wall


def _swap_wall(session: Session, new_wall: VirtualWall) -> Session:
    walls = tuple(new_wall if w.id == new_wall.id else w for w in session.walls)
    return replace(session, walls=walls)


def _alloc(session: Session, prefix: str) -> tuple[Session, str]:
    counter = session.id_counter + 1
    return replace(session, id_counter=counter), f"{prefix}{counter}"


def _quantize(value: float) -> float:
    return round(value, 6)


# ---------------------------------------------------------------------------
# Command handlers
# ---------------------------------------------------------------------------


def _assign_layout(
    session: Session, wall: VirtualWall, rects: tuple[GridRect, ...]
) -> tuple[Session, VirtualWall]:
    """Replace a wall's viewports, carrying existing contents over in order.

    Contents that no longer fit go to the hidden stack in their old viewport
    order; layout edits never drop content.
    """
    visible = [vp.content_id for vp in wall.viewports if vp.content_id]
    viewports = []
    for rect in rects:
        session, vid = _alloc(session, "v")
        content = visible.pop(0) if visible else None
        viewports.append(Viewport(vid, rect, content))
    new_wall = replace(
        wall,
        viewports=tuple(viewports),
        hidden_stack=(*visible, *wall.hidden_stack),
        maximized_viewport_id=None,
    )
    return session, new_wall


def _h_apply_preset(session: Session, args: dict, meta: CommandMeta):
    wall = _find_wall(session, args)
    view_count = _want_int(args, "viewCount")
    variant_index = _want_int(args, "variantIndex", optional=True) or 0
    catalog = layout.preset_catalog(view_count, wall.grid_cols, wall.grid_rows)
    if not 0 <= variant_index < len(catalog):
        raise CommandRejected(
            Reason.MALFORMED,
            f"variantIndex {variant_index} out of range for {view_count} views",
        )
    session, new_wall = _assign_layout(session, wall, catalog[variant_index].rects)
    return _swap_wall(session, new_wall), {"wallId": wall.id}


def _h_apply_custom_layout(session: Session, args: dict, meta: CommandMeta):
    wall = _find_wall(session, args)
    raw = args.get("rects")
    if not isinstance(raw, list) or not raw:
        raise CommandRejected(Reason.MALFORMED, "rects must be a non-empty list")
    rects = tuple(_parse_rect(r) for r in raw)
    result = layout.validate_layout(wall.grid_cols, wall.grid_rows, rects)
    if not result.ok:
        detail = "; ".join(f"{v.kind}: {v.detail}" for v in result.violations)
        raise CommandRejected(Reason.REJECTED_RECT, detail)
    session, new_wall = _assign_layout(session, wall, rects)
    return _swap_wall(session, new_wall), {"wallId": wall.id}


def _h_insert_view(session: Session, args: dict, meta: CommandMeta):
    wall = _find_wall(session, args)
    if not isinstance(args.get("candidate"), dict):
        raise CommandRejected(Reason.MALFORMED, "candidate must be an object")
    try:
        candidate = InsertCandidate.from_dict(args["candidate"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CommandRejected(Reason.MALFORMED, f"bad candidate: {exc}") from exc
    content_id = _want_str(args, "contentId", optional=True)
    if content_id is not None and content_id not in session.contents:
        raise CommandRejected(Reason.NO_SUCH_ENTITY, f"no content {content_id!r}")
    session, vid = _alloc(session, "v")
    new_wall = layout.apply_insert(wall, candidate, vid, content_id)
    return _swap_wall(session, new_wall), {"wallId": wall.id, "viewportId": vid}


def _h_swap_views(session: Session, args: dict, meta: CommandMeta):
    wall = _find_wall(session, args)
    slot_a = _parse_slot(args.get("slotA"))
    slot_b = _parse_slot(args.get("slotB"))
    return _swap_wall(session, layout.swap_views(wall, slot_a, slot_b)), {
        "wallId": wall.id
    }


def _h_maximize_view(session: Session, args: dict, meta: CommandMeta):
    wall = _find_wall(session, args)
    viewport_id = _want_str(args, "viewportId")
    return _swap_wall(session, layout.maximize_view(wall, viewport_id)), {
        "wallId": wall.id
    }


def _h_restore_view(session: Session, args: dict, meta: CommandMeta):
    wall = _find_wall(session, args)
    return _swap_wall(session, layout.restore_view(wall)), {"wallId": wall.id}


def _h_hide_view(session: Session, args: dict, meta: CommandMeta):
    wall = _find_wall(session, args)
    viewport_id = _want_str(args, "viewportId")
    return _swap_wall(session, layout.hide_view(wall, viewport_id)), {"wallId": wall.id}


def _h_delete_view(session: Session, args: dict, meta: CommandMeta):
    wall = _find_wall(session, args)
    viewport_id = _want_str(args, "viewportId")
    return _swap_wall(session, layout.delete_view(wall, viewport_id)), {
        "wallId": wall.id
    }


def _h_create_wall(session: Session, args: dict, meta: CommandMeta):
    name = _want_str(args, "name", optional=True) or f"Wall {len(session.walls) + 1}"
    if not name.strip():
        raise CommandRejected(Reason.INVALID_NAME, "wall name must be non-empty")
    cols = _want_int(args, "gridCols", optional=True) or session.default_grid_cols
    rows = _want_int(args, "gridRows", optional=True) or session.default_grid_rows
    _check_grid(cols, rows)
    session, wall_id = _alloc(session, "w")
    wall = VirtualWall(id=wall_id, name=name, grid_cols=cols, grid_rows=rows)
    return replace(session, walls=(*session.walls, wall)), {"wallId": wall_id}


def _h_rename_wall(session: Session, args: dict, meta: CommandMeta):
    wall = _find_wall(session, args)
    name = _want_str(args, "name")
    if not name.strip():
        raise CommandRejected(Reason.INVALID_NAME, "wall name must be non-empty")
    return _swap_wall(session, replace(wall, name=name)), {"wallId": wall.id}


def _h_switch_active_wall(session: Session, args: dict, meta: CommandMeta):
    wall_id = _want_str(args, "wallId")
    if session.wall(wall_id) is None:
        raise CommandRejected(Reason.NO_SUCH_ENTITY, f"no wall {wall_id!r}")
    # switching to the already-active wall is an idempotent success
    return replace(session, active_wall_id=wall_id), {"wallId": wall_id}


_SOURCE_KEYS = {
    ContentKind.PDF: "file",
    ContentKind.IMAGE: "file",
    ContentKind.VIDEO: "file",
    ContentKind.WEB_LINK: "url",
}


def _h_register_content(session: Session, args: dict, meta: CommandMeta):
    kind_raw = _want_str(args, "kind")
    try:
        kind = ContentKind(kind_raw)
    except ValueError:
        raise CommandRejected(Reason.INVALID_CONTENT, f"unknown kind {kind_raw!r}")
    source = args.get("source")
    if not isinstance(source, dict):
        raise CommandRejected(Reason.INVALID_CONTENT, "source must be an object")
    title = _want_str(args, "title", optional=True) or ""

    if kind is ContentKind.SCREEN_SHARE:
        owner = source.get("owner", meta.actor_id)
        label = source.get("streamLabel", "")
        if not isinstance(owner, str) or not isinstance(label, str):
            raise CommandRejected(Reason.INVALID_CONTENT, "bad screen-share source")
        if owner not in session.participants:
            raise CommandRejected(Reason.NO_SUCH_ENTITY, f"no participant {owner!r}")
        clean_source = {"owner": owner, "streamLabel": label}
    else:
        key = _SOURCE_KEYS[kind]
        value = source.get(key)
        if not isinstance(value, str) or not value:
            raise CommandRejected(
                Reason.INVALID_CONTENT, f"{kind.value} source needs a non-empty {key!r}"
            )
        clean_source = {key: value}

    session, content_id = _alloc(session, "c")
    content = Content(
        id=content_id,
        kind=kind,
        source=clean_source,
        title=title,
        uploader_id=meta.actor_id,
    )
    contents = dict(session.contents)
    contents[content_id] = content
    return replace(session, contents=contents), {"contentId": content_id}


def _h_set_viewport_content(session: Session, args: dict, meta: CommandMeta):
    wall = _find_wall(session, args)
    viewport_id = _want_str(args, "viewportId")
    vp = wall.viewport(viewport_id)
    if vp is None:
        raise CommandRejected(Reason.NO_SUCH_SLOT, f"no viewport {viewport_id!r}")
    content_id = _want_str(args, "contentId", optional=True)
    if content_id == vp.content_id:
        return session, {"wallId": wall.id}  # idempotent
    stack = list(wall.hidden_stack)
    if content_id is not None:
        if content_id not in session.contents:
            raise CommandRejected(Reason.NO_SUCH_ENTITY, f"no content {content_id!r}")
        if any(v.content_id == content_id for v in wall.viewports):
            raise CommandRejected(
                Reason.CONTENT_IN_USE,
                f"content {content_id} is already visible; swap instead",
            )
        if content_id in stack:
            stack.remove(content_id)
    if vp.content_id is not None:
        stack.insert(0, vp.content_id)  # displaced content stays reachable
    viewports = tuple(
        replace(v, content_id=content_id) if v.id == viewport_id else v
        for v in wall.viewports
    )
    new_wall = replace(wall, viewports=viewports, hidden_stack=tuple(stack))
    problems = layout.wall_violations(new_wall)
    if problems:
        raise CommandRejected(Reason.INTERNAL_GEOMETRY_ERROR, "; ".join(problems))
    return _swap_wall(session, new_wall), {"wallId": wall.id}


def _h_update_content_state(session: Session, args: dict, meta: CommandMeta):
    content_id = _want_str(args, "contentId")
    content = session.contents.get(content_id)
    if content is None:
        raise CommandRejected(Reason.NO_SUCH_ENTITY, f"no content {content_id!r}")
    fields = {k: v for k, v in args.items() if k in
              ("page", "scrollX", "scrollY", "zoom", "playhead")}
    if not fields:
        raise CommandRejected(Reason.MALFORMED, "no view-state fields given")
    state = content.view_state
    if "page" in fields:
        page = _want_int(args, "page")
        if page < 1:
            raise CommandRejected(Reason.INVALID_CONTENT_STATE, "page must be >= 1")
        if page != 1 and content.kind is not ContentKind.PDF:
            raise CommandRejected(
                Reason.INVALID_CONTENT_STATE, f"{content.kind.value} has a single page"
            )
        state = replace(state, page=page)
    for key, attr in (("scrollX", "scroll_x"), ("scrollY", "scroll_y")):
        if key in fields:
            value = _want_number(args, key)
            if not 0.0 <= value <= 1.0:
                raise CommandRejected(
                    Reason.INVALID_CONTENT_STATE, f"{key} must be within 0..1"
                )
            state = replace(state, **{attr: _quantize(value)})
    if "zoom" in fields:
        zoom = _want_number(args, "zoom")
        if not 0.0 < zoom <= 1e6:
            raise CommandRejected(Reason.INVALID_CONTENT_STATE, "zoom must be positive")
        state = replace(state, zoom=_quantize(zoom))
    if "playhead" in fields:
        playhead = _want_number(args, "playhead")
        if playhead < 0 or playhead > 1e9:
            raise CommandRejected(
                Reason.INVALID_CONTENT_STATE, "playhead must be >= 0 seconds"
            )
        if playhead != 0 and content.kind is not ContentKind.VIDEO:
            raise CommandRejected(
                Reason.INVALID_CONTENT_STATE, f"{content.kind.value} has no playhead"
            )
        state = replace(state, playhead=_quantize(playhead))
    contents = dict(session.contents)
    contents[content_id] = replace(content, view_state=state)
    return replace(session, contents=contents), {"contentId": content_id}


def _h_add_note(session: Session, args: dict, meta: CommandMeta):
    content_id = _want_str(args, "contentId")
    if content_id not in session.contents:
        raise CommandRejected(Reason.NO_SUCH_ENTITY, f"no content {content_id!r}")
    if meta.actor_id not in session.participants:
        raise CommandRejected(Reason.NO_SUCH_ENTITY, f"no participant {meta.actor_id!r}")
    text = _want_str(args, "text")
    if not text.strip():
        raise CommandRejected(Reason.EMPTY_NOTE, "note text must be non-empty")
    session, note_id = _alloc(session, "n")
    note = Note(
        id=note_id,
        author_id=meta.actor_id,
        content_id=content_id,
        text=text,
        created_at=meta.server_time,
    )
    return replace(session, notes=(*session.notes, note)), {"noteId": note_id}


def _h_delete_note(session: Session, args: dict, meta: CommandMeta):
    note_id = _want_str(args, "noteId")
    if all(note.id != note_id for note in session.notes):
        raise CommandRejected(Reason.NO_SUCH_ENTITY, f"no note {note_id!r}")
    notes = tuple(note for note in session.notes if note.id != note_id)
    return replace(session, notes=notes), {"noteId": note_id}


def _h_join_participant(session: Session, args: dict, meta: CommandMeta):
    participant_id = _want_str(args, "participantId", optional=True) or meta.actor_id
    display_name = _want_str(args, "displayName")
    if not display_name.strip():
        raise CommandRejected(Reason.INVALID_NAME, "displayName labels cursors")
    role_raw = _want_str(args, "role")
    try:
        role = Role(role_raw)
    except ValueError:
        raise CommandRejected(Reason.MALFORMED, f"unknown role {role_raw!r}")
    participants = dict(session.participants)
    participants[participant_id] = Participant(participant_id, display_name, role, True)
    return replace(session, participants=participants), {"participantId": participant_id}


def _h_leave_participant(session: Session, args: dict, meta: CommandMeta):
    participant_id = _want_str(args, "participantId", optional=True) or meta.actor_id
    participant = session.participants.get(participant_id)
    if participant is None:
        raise CommandRejected(Reason.NO_SUCH_ENTITY, f"no participant {participant_id!r}")
    participants = dict(session.participants)
    participants[participant_id] = replace(participant, connected=False)
    contents = session.contents
    touched = {
        cid: replace(c, ended=True)
        for cid, c in contents.items()
        if c.kind is ContentKind.SCREEN_SHARE
        and not c.ended
        and c.source.get("owner") == participant_id
    }
    if touched:
        contents = dict(contents)
        contents.update(touched)
    return replace(session, participants=participants, contents=contents), {
        "participantId": participant_id
    }


_HANDLERS: dict[str, Callable] = {
    "ApplyPreset": _h_apply_preset,
    "ApplyCustomLayout": _h_apply_custom_layout,
    "InsertView": _h_insert_view,
    "SwapViews": _h_swap_views,
    "MaximizeView": _h_maximize_view,
    "RestoreView": _h_restore_view,
    "HideView": _h_hide_view,
    "DeleteView": _h_delete_view,
    "CreateWall": _h_create_wall,
    "RenameWall": _h_rename_wall,
    "SwitchActiveWall": _h_switch_active_wall,
    "RegisterContent": _h_register_content,
    "SetViewportContent": _h_set_viewport_content,
    "UpdateContentState": _h_update_content_state,
    "AddNote": _h_add_note,
    "DeleteNote": _h_delete_note,
    "JoinParticipant": _h_join_participant,
    "LeaveParticipant": _h_leave_participant,
}

COMMAND_VARIANTS = tuple(sorted(_HANDLERS))

# Commands that only rearrange geometry; they may never change the multiset of
# contents reachable on a wall (viewports plus hidden stack).
LAYOUT_VARIANTS = (
    "ApplyPreset",
    "ApplyCustomLayout",
    "InsertView",
    "SwapViews",
    "MaximizeView",
    "RestoreView",
    "HideView",
    "DeleteView",
)


def apply_command(
    session: Session, command: Command, meta: CommandMeta
) -> tuple[Session, Event]:
    """Apply one command, returning the new session and its transition event.

    Raises CommandRejected on any failure; the input session is untouched
    either way (all values are immutable).
    """
    handler = _HANDLERS.get(command.variant)
    if handler is None:
        raise CommandRejected(Reason.MALFORMED, f"unknown command {command.variant!r}")
    if not isinstance(command.args, dict):
        raise CommandRejected(Reason.MALFORMED, "command args must be an object")
    try:
        new_session, result = handler(session, command.args, meta)
    except LayoutError as exc:
        raise CommandRejected(exc.reason, exc.detail) from exc
    new_session = replace(new_session, version=session.version + 1)
    event = Event(
        seq=new_session.version,
        actor_id=meta.actor_id,
        server_time=meta.server_time,
        request_id=meta.request_id,
        command=command,
        result=result,
    )
    return new_session, event


def apply_event(session: Session, event: Event) -> Session:
    """Replay a journaled event; the reducer's determinism makes this exact."""
    if event.seq != session.version + 1:
        raise CommandRejected(
            Reason.MALFORMED,
            f"event seq {event.seq} does not follow version {session.version}",
        )
    meta = CommandMeta(event.actor_id, event.server_time, event.request_id)
    new_session, replayed = apply_command(session, event.command, meta)
    if replayed.result != event.result:
        raise CommandRejected(
            Reason.MALFORMED,
            f"replay diverged at seq {event.seq}: {replayed.result} != {event.result}",
        )
    return new_session


# ---------------------------------------------------------------------------
# Queries and audits
# ---------------------------------------------------------------------------


def notes_for_content(session: Session, content_id: str) -> list[Note]:
    return [note for note in session.notes if note.content_id == content_id]


def notes_by_author(session: Session, author_id: str) -> list[Note]:
    return [note for note in session.notes if note.author_id == author_id]


def session_violations(session: Session) -> list[str]:
    """Full referential-integrity and invariant audit; empty list means sound."""
    problems: list[str] = []
    if not session.walls:
        problems.append("session has no walls")
    if session.wall(session.active_wall_id) is None:
        problems.append(f"active wall {session.active_wall_id!r} missing")
    wall_ids = [w.id for w in session.walls]
    if len(set(wall_ids)) != len(wall_ids):
        problems.append("duplicate wall ids")
    for wall in session.walls:
        problems.extend(layout.wall_violations(wall))
        for content_id in wall.content_ids():
            if content_id not in session.contents:
                problems.append(f"wall {wall.id} references unknown content {content_id}")
    for note in session.notes:
        if note.content_id not in session.contents:
            problems.append(f"note {note.id} references unknown content {note.content_id}")
        if not note.text.strip():
            problems.append(f"note {note.id} is empty")
    for cid, content in session.contents.items():
        if cid != content.id:
            problems.append(f"content map key {cid} != id {content.id}")
        state = content.view_state
        if state.page < 1 or not (0 <= state.scroll_x <= 1) or not (
            0 <= state.scroll_y <= 1
        ) or state.zoom <= 0 or state.playhead < 0:
            problems.append(f"content {cid} has an out-of-range view state")
        if content.kind is ContentKind.SCREEN_SHARE:
            owner = content.source.get("owner")
            if owner not in session.participants:
                problems.append(f"screen share {cid} has unknown owner {owner!r}")
    for pid, participant in session.participants.items():
        if pid != participant.id:
            problems.append(f"participant map key {pid} != id {participant.id}")
        if not participant.display_name.strip():
            problems.append(f"participant {pid} has an empty display name")
    if session.version < 0:
        problems.append("negative version")
    return problems
