"""Session aggregate and reducer: commands, rejections, determinism, replay."""

import json
import random

import pytest

from wallspace.canonical import canonical_text
from wallspace.errors import CommandRejected, Reason
from wallspace.layout import GridRect
from wallspace.session import (
    Command,
    CommandMeta,
    ContentKind,
    Session,
    apply_command,
    apply_event,
    new_session,
    notes_by_author,
    notes_for_content,
    session_violations,
)

META = CommandMeta(actor_id="p-alice", server_time=1_700_000_000_000)


def cmd(variant: str, **args) -> Command:
    return Command(variant, args)


def run(session: Session, *commands: Command, actor: str = "p-alice"):
    events = []
    for i, command in enumerate(commands):
        meta = CommandMeta(actor, META.server_time + i, f"r{session.version + 1}")
        session, event = apply_command(session, command, meta)
        events.append(event)
    return session, events


def joined(session: Session, *participants: str) -> Session:
    for pid in participants:
        session, _ = run(session, cmd(
            "JoinParticipant", participantId=pid,
            displayName=pid.removeprefix("p-"), role="PersonalDevice"),
            actor=pid)
    return session


def fresh(*participants: str) -> Session:
    return joined(new_session("design review"), *(participants or ("p-alice",)))


def rejects(session: Session, command: Command, reason: Reason, actor="p-alice"):
    version = session.version
    with pytest.raises(CommandRejected) as excinfo:
        apply_command(session, command, CommandMeta(actor, META.server_time))
    assert excinfo.value.reason is reason
    assert session.version == version  # input value untouched
    return excinfo.value


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------


def test_new_session_has_one_empty_wall():
    session = new_session("design review", 12, 12)
    assert session.version == 0
    assert len(session.walls) == 1
    assert session.active_wall().viewports == ()
    assert session.contents == {} and session.notes == ()


def test_new_session_degenerate_grid_is_legal():
    session = new_session("x", 1, 1)
    assert session.active_wall().grid_cols == 1


def test_new_session_rejects_empty_name_and_bad_grid():
    with pytest.raises(CommandRejected) as excinfo:
        new_session("")
    assert excinfo.value.reason is Reason.INVALID_NAME
    with pytest.raises(CommandRejected) as excinfo:
        new_session("ok", 0, 12)
    assert excinfo.value.reason is Reason.INVALID_GRID


# ---------------------------------------------------------------------------
# Layout commands through the reducer
# ---------------------------------------------------------------------------


def test_apply_preset_quartering():
    from wallspace.layout import preset_catalog

    session = fresh()
    base = session.version
    catalog_variant = next(
        i for i, preset in enumerate(preset_catalog(4))
        if set(preset.rects) == {
            GridRect(0, 0, 6, 6), GridRect(6, 0, 6, 6),
            GridRect(0, 6, 6, 6), GridRect(6, 6, 6, 6),
        }
    )
    session, _ = run(session, cmd("ApplyPreset", viewCount=4,
                                  variantIndex=catalog_variant))
    assert session.version == base + 1
    assert len(session.active_wall().viewports) == 4


def test_swap_twice_is_original_wall():
    session, _ = run(fresh(), cmd("ApplyPreset", viewCount=2, variantIndex=0))
    wall = session.active_wall()
    v1, v2 = wall.viewports[0].id, wall.viewports[1].id
    before = wall.to_dict()
    swap = cmd("SwapViews", slotA={"viewportId": v1}, slotB={"viewportId": v2})
    session, _ = run(session, swap, swap)
    assert session.active_wall().to_dict() == before
    assert session.version == 4  # join + preset + two swaps


def test_preset_carries_contents_and_stacks_leftovers():
    session = fresh()
    session, _ = run(session, cmd("ApplyPreset", viewCount=3, variantIndex=0))
    wall = session.active_wall()
    for k in range(3):
        session, events = run(session, cmd(
            "RegisterContent", kind="WebLink",
            source={"url": f"https://docs.test/{k}"}, title=f"d{k}"))
        session, _ = run(session, cmd(
            "SetViewportContent", viewportId=wall.viewports[k].id,
            contentId=events[0].result["contentId"]))
    placed = [vp.content_id for vp in session.active_wall().viewports]
    session, _ = run(session, cmd("ApplyPreset", viewCount=2, variantIndex=0))
    wall = session.active_wall()
    assert [vp.content_id for vp in wall.viewports] == placed[:2]
    assert wall.hidden_stack == (placed[2],)


def test_insert_view_via_candidate():
    session, _ = run(fresh(), cmd("ApplyPreset", viewCount=1, variantIndex=0))
    from wallspace.layout import enumerate_insert_candidates

    candidate = enumerate_insert_candidates(session.active_wall())[0]
    session, events = run(session, cmd("InsertView", candidate=candidate.to_dict()))
    assert len(session.active_wall().viewports) == 2
    assert events[0].result["viewportId"] == session.active_wall().viewports[-1].id


def test_insert_with_stale_candidate_rejected():
    session, _ = run(fresh(), cmd("ApplyPreset", viewCount=1, variantIndex=0))
    from wallspace.layout import enumerate_insert_candidates

    candidate = enumerate_insert_candidates(session.active_wall())[0]
    session, _ = run(session, cmd("ApplyPreset", viewCount=2, variantIndex=0))
    rejects(session, cmd("InsertView", candidate=candidate.to_dict()),
            Reason.STALE_CANDIDATE)


def test_layout_errors_surface_as_rejections():
    session = fresh()
    rejects(session, cmd("ApplyPreset", viewCount=11), Reason.UNSUPPORTED_PRESET_COUNT)
    rejects(session, cmd("RestoreView"), Reason.NOT_MAXIMIZED)
    rejects(session, cmd("HideView", viewportId="nope"), Reason.NO_SUCH_SLOT)
    rejects(session, cmd("ApplyCustomLayout", rects=[
        {"col": 0, "row": 0, "colSpan": 13, "rowSpan": 1}]), Reason.REJECTED_RECT)
    rejects(session, cmd("SwapViews", wallId="w404",
                         slotA={"stackIndex": 0}, slotB={"stackIndex": 1}),
            Reason.NO_SUCH_ENTITY)


# ---------------------------------------------------------------------------
# Contents
# ---------------------------------------------------------------------------


def test_register_content_defaults():
    session, events = run(fresh(), cmd(
        "RegisterContent", kind="Pdf", source={"file": "abc123"}, title="spec"))
    content = session.contents[events[0].result["contentId"]]
    assert content.kind is ContentKind.PDF
    assert content.view_state.page == 1
    assert content.view_state.zoom == 1.0
    assert content.uploader_id == "p-alice"
    assert not content.ended


def test_register_weblink_requires_url():
    rejects(fresh(), cmd("RegisterContent", kind="WebLink", source={"url": ""}),
            Reason.INVALID_CONTENT)
    rejects(fresh(), cmd("RegisterContent", kind="Nope", source={}),
            Reason.INVALID_CONTENT)
    rejects(fresh(), cmd("RegisterContent", kind="Pdf", source={}),
            Reason.INVALID_CONTENT)


def test_screen_share_ends_when_owner_leaves():
    session = fresh("p-alice", "p-bob")
    session, events = run(session, cmd(
        "RegisterContent", kind="ScreenShare",
        source={"owner": "p-bob", "streamLabel": "window 1"}), actor="p-bob")
    content_id = events[0].result["contentId"]
    assert not session.contents[content_id].ended
    session, _ = run(session, cmd("LeaveParticipant", participantId="p-bob"))
    content = session.contents[content_id]
    assert content.ended  # source ended, content retained
    assert not session.participants["p-bob"].connected


def test_screen_share_unknown_owner():
    rejects(fresh(), cmd("RegisterContent", kind="ScreenShare",
                         source={"owner": "p-ghost"}), Reason.NO_SUCH_ENTITY)


def test_update_content_state_unregistered():
    rejects(fresh(), cmd("UpdateContentState", contentId="c404", page=3),
            Reason.NO_SUCH_ENTITY)


def test_update_content_state_merges_and_validates():
    session, events = run(fresh(), cmd(
        "RegisterContent", kind="Pdf", source={"file": "f1"}, title="doc"))
    cid = events[0].result["contentId"]
    session, _ = run(session, cmd("UpdateContentState", contentId=cid, page=3))
    session, _ = run(session, cmd("UpdateContentState", contentId=cid,
                                  zoom=1.5, scrollX=0.25, scrollY=0.75))
    state = session.contents[cid].view_state
    assert (state.page, state.zoom, state.scroll_x, state.scroll_y) == (3, 1.5, 0.25, 0.75)
    rejects(session, cmd("UpdateContentState", contentId=cid, page=0),
            Reason.INVALID_CONTENT_STATE)
    rejects(session, cmd("UpdateContentState", contentId=cid, scrollX=1.5),
            Reason.INVALID_CONTENT_STATE)
    rejects(session, cmd("UpdateContentState", contentId=cid, zoom=0),
            Reason.INVALID_CONTENT_STATE)
    rejects(session, cmd("UpdateContentState", contentId=cid, playhead=10),
            Reason.INVALID_CONTENT_STATE)  # pdf has no playhead
    rejects(session, cmd("UpdateContentState", contentId=cid),
            Reason.MALFORMED)


def test_page_turn_on_image_rejected():
    session, events = run(fresh(), cmd(
        "RegisterContent", kind="Image", source={"file": "f2"}, title="img"))
    rejects(session, cmd("UpdateContentState",
                         contentId=events[0].result["contentId"], page=2),
            Reason.INVALID_CONTENT_STATE)


def test_hidden_content_still_accepts_state_updates():
    session, events = run(fresh(), cmd(
        "RegisterContent", kind="Pdf", source={"file": "f3"}, title="doc"),
        cmd("ApplyPreset", viewCount=1, variantIndex=0))
    cid = events[0].result["contentId"]
    viewport = session.active_wall().viewports[0].id
    session, _ = run(session,
                     cmd("SetViewportContent", viewportId=viewport, contentId=cid),
                     cmd("HideView", viewportId=viewport))
    assert cid in session.active_wall().hidden_stack
    session, _ = run(session, cmd("UpdateContentState", contentId=cid, page=7))
    assert session.contents[cid].view_state.page == 7


def test_set_viewport_content_moves_and_guards():
    session = fresh()
    session, _ = run(session, cmd("ApplyPreset", viewCount=2, variantIndex=0))
    wall = session.active_wall()
    va, vb = wall.viewports[0].id, wall.viewports[1].id
    session, ev1 = run(session, cmd("RegisterContent", kind="WebLink",
                                    source={"url": "https://a"}, title="a"))
    session, ev2 = run(session, cmd("RegisterContent", kind="WebLink",
                                    source={"url": "https://b"}, title="b"))
    ca, cb = ev1[0].result["contentId"], ev2[0].result["contentId"]
    session, _ = run(session, cmd("SetViewportContent", viewportId=va, contentId=ca))
    # placing a visible content elsewhere is refused; swap exists for that
    rejects(session, cmd("SetViewportContent", viewportId=vb, contentId=ca),
            Reason.CONTENT_IN_USE)
    # replacing content pushes the old one onto the stack
    session, _ = run(session, cmd("SetViewportContent", viewportId=va, contentId=cb))
    wall = session.active_wall()
    assert wall.viewport(va).content_id == cb
    assert wall.hidden_stack == (ca,)
    # pulling from the stack removes the stack entry
    session, _ = run(session, cmd("SetViewportContent", viewportId=vb, contentId=ca))
    wall = session.active_wall()
    assert wall.viewport(vb).content_id == ca
    assert wall.hidden_stack == ()
    rejects(session, cmd("SetViewportContent", viewportId=va, contentId="c404"),
            Reason.NO_SUCH_ENTITY)


# ---------------------------------------------------------------------------
# Notes
# ---------------------------------------------------------------------------


def _session_with_content():
    session, events = run(fresh(), cmd(
        "RegisterContent", kind="Pdf", source={"file": "f9"}, title="doc"))
    return session, events[0].result["contentId"]


def test_add_note_listed_under_content_and_author():
    session, cid = _session_with_content()
    session, events = run(session, cmd("AddNote", contentId=cid, text="check p3"))
    note_id = events[0].result["noteId"]
    assert [n.id for n in notes_for_content(session, cid)] == [note_id]
    assert [n.id for n in notes_by_author(session, "p-alice")] == [note_id]
    note = session.notes[0]
    assert note.created_at == events[0].server_time


def test_note_on_hidden_content_allowed():
    session, cid = _session_with_content()
    session, _ = run(session, cmd("ApplyPreset", viewCount=1, variantIndex=0))
    viewport = session.active_wall().viewports[0].id
    session, _ = run(session,
                     cmd("SetViewportContent", viewportId=viewport, contentId=cid),
                     cmd("HideView", viewportId=viewport))
    session, _ = run(session, cmd("AddNote", contentId=cid, text="still relevant"))
    assert len(notes_for_content(session, cid)) == 1


def test_note_rejections():
    session, cid = _session_with_content()
    rejects(session, cmd("AddNote", contentId=cid, text="   "), Reason.EMPTY_NOTE)
    rejects(session, cmd("AddNote", contentId="c404", text="x"), Reason.NO_SUCH_ENTITY)
    rejects(session, cmd("AddNote", contentId=cid, text="x"),
            Reason.NO_SUCH_ENTITY, actor="p-ghost")
    rejects(session, cmd("DeleteNote", noteId="n404"), Reason.NO_SUCH_ENTITY)


def test_delete_note():
    session, cid = _session_with_content()
    session, events = run(session, cmd("AddNote", contentId=cid, text="drop me"))
    session, _ = run(session, cmd("DeleteNote", noteId=events[0].result["noteId"]))
    assert session.notes == ()


# ---------------------------------------------------------------------------
# Walls and participants
# ---------------------------------------------------------------------------


def test_create_switch_rename_wall():
    session = fresh()
    session, events = run(session, cmd("CreateWall", name="scenario B"))
    wall_id = events[0].result["wallId"]
    assert session.wall(wall_id).name == "scenario B"
    assert session.active_wall_id != wall_id
    session, _ = run(session, cmd("SwitchActiveWall", wallId=wall_id))
    assert session.active_wall_id == wall_id
    version = session.version
    session, _ = run(session, cmd("SwitchActiveWall", wallId=wall_id))
    assert session.version == version + 1  # idempotent success still counts
    session, _ = run(session, cmd("RenameWall", wallId=wall_id, name="scenario C"))
    assert session.wall(wall_id).name == "scenario C"
    rejects(session, cmd("SwitchActiveWall", wallId="w404"), Reason.NO_SUCH_ENTITY)
    rejects(session, cmd("RenameWall", wallId=wall_id, name="  "),
            Reason.INVALID_NAME)


def test_join_participant_upserts():
    session = fresh()
    session, _ = run(session, cmd(
        "JoinParticipant", participantId="p-alice", displayName="Alice",
        role="WallDisplay"))
    participant = session.participants["p-alice"]
    assert participant.display_name == "Alice"
    assert participant.role.value == "WallDisplay"
    assert participant.connected
    rejects(session, cmd("LeaveParticipant", participantId="p-ghost"),
            Reason.NO_SUCH_ENTITY)


def test_malformed_payloads():
    session = fresh()
    rejects(session, cmd("ApplyPreset", viewCount="four"), Reason.MALFORMED)
    rejects(session, cmd("SwapViews", slotA="v1", slotB="v2"), Reason.MALFORMED)
    rejects(session, cmd("NoSuchCommand"), Reason.MALFORMED)
    rejects(session, cmd("JoinParticipant", displayName="x", role="Alien"),
            Reason.MALFORMED)


# ---------------------------------------------------------------------------
# Determinism, replay, integrity
# ---------------------------------------------------------------------------


def test_event_replay_reproduces_state():
    from wallspace.simharness.runner import CommandGenerator

    rng = random.Random(11)

    class _FakeClient:
        replica = None

    session = joined(new_session("replay"), "p-alice", "p-bob")
    genesis = session
    generator = CommandGenerator(rng)
    fake = _FakeClient()
    events = []
    for i in range(300):
        fake.replica = session
        built = generator.build(fake)
        if built is None:
            continue
        variant, args = built
        actor = "p-alice" if rng.random() < 0.5 else "p-bob"
        meta = CommandMeta(actor, META.server_time + i, f"rq{i}")
        try:
            session, event = apply_command(session, Command(variant, args), meta)
        except CommandRejected:
            continue
        events.append(event)
        assert event.seq == session.version
        assert not session_violations(session)

    replayed = genesis
    for event in events:
        replayed = apply_event(replayed, event)
    assert canonical_text(replayed.to_dict()) == canonical_text(session.to_dict())


def test_apply_event_refuses_gaps_and_divergence():
    session, events = run(fresh(), cmd("ApplyPreset", viewCount=2, variantIndex=0))
    stale = events[0]
    with pytest.raises(CommandRejected):
        apply_event(session, stale)  # seq 2 does not follow version 2


def test_canonical_round_trip():
    session, _ = run(fresh(), cmd("ApplyPreset", viewCount=4, variantIndex=0),
                     cmd("RegisterContent", kind="WebLink",
                         source={"url": "https://x"}, title="x"))
    text = canonical_text(session.to_dict())
    rebuilt = Session.from_dict(json.loads(text))
    assert canonical_text(rebuilt.to_dict()) == text
