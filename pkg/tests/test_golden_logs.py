"""The committed golden logs stay replayable and reproducible."""

import json
from pathlib import Path

import pytest

from wallspace.canonical import canonical_text, state_hash
from wallspace.session import Event, Session, apply_event

GOLDEN_DIR = Path(__file__).resolve().parent.parent / "frontend" / "golden"
GOLDEN_FILES = sorted(GOLDEN_DIR.glob("*.json"))


def test_expected_log_set_exists():
    assert [p.stem for p in GOLDEN_FILES] == [
        "churny", "content-heavy", "duplicates", "layout-mix", "tour",
    ]


@pytest.mark.parametrize("path", GOLDEN_FILES, ids=lambda p: p.stem)
def test_golden_log_replays_to_recorded_state(path):
    doc = json.loads(path.read_text(encoding="utf-8"))
    state = Session.from_dict(doc["genesis"])
    for raw in doc["events"]:
        state = apply_event(state, Event.from_dict(raw))
    assert canonical_text(state.to_dict()) == doc["finalCanonical"]
    assert state_hash(state.to_dict()) == doc["finalStateHash"]


def test_regeneration_is_byte_identical(tmp_path):
    from scripts_path import ensure  # noqa: F401  (adds scripts/ to sys.path)
    import export_golden_logs

    for name, scenario in export_golden_logs.RUNS:
        regenerated = export_golden_logs.export_one(name, scenario, tmp_path)
        committed = json.loads((GOLDEN_DIR / f"{name}.json").read_text())
        assert regenerated == committed, f"{name} drifted; rerun the export script"
