"""Regenerate the golden event logs the browser client replays in its tests.

Each log holds a genesis session document, the full ordered event list, and
the canonical text plus hash of the final state. Runs are fully deterministic,
so re-running this script must reproduce the committed files byte for byte.

Usage: python scripts/export_golden_logs.py [output_dir]
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

from wallspace.canonical import canonical_text, state_hash
from wallspace.persistence import FileStorage, SessionStore
from wallspace.simharness import InProcessServer, Scenario, run_scenario

FEATURE_TOUR = [
    {"op": "command", "client": 0, "variant": "ApplyPreset",
     "args": {"viewCount": 5, "variantIndex": 2}},
    {"op": "command", "client": 1, "variant": "RegisterContent",
     "args": {"kind": "Pdf", "source": {"file": "a" * 8}, "title": "brief"}},
    {"op": "command", "client": 1, "variant": "RegisterContent",
     "args": {"kind": "Video", "source": {"file": "b" * 8}, "title": "lab run"}},
    {"op": "command", "client": 0, "variant": "RegisterContent",
     "args": {"kind": "WebLink", "source": {"url": "https://docs.test/spec"},
              "title": "wiki"}},
    {"op": "command", "client": 1, "variant": "RegisterContent",
     "args": {"kind": "ScreenShare", "source": {"streamLabel": "demo"},
              "title": "demo"}},
    {"op": "drain"},
    {"op": "command", "client": 0, "variant": "SetViewportContent",
     "args": {"viewportId": "v2", "contentId": "c7"}},
    {"op": "command", "client": 0, "variant": "SetViewportContent",
     "args": {"viewportId": "v3", "contentId": "c8"}},
    {"op": "command", "client": 1, "variant": "UpdateContentState",
     "args": {"contentId": "c7", "page": 12}},
    {"op": "command", "client": 1, "variant": "UpdateContentState",
     "args": {"contentId": "c7", "zoom": 1.75, "scrollX": 0.125, "scrollY": 0.5}},
    {"op": "command", "client": 0, "variant": "UpdateContentState",
     "args": {"contentId": "c8", "playhead": 93.52}},
    {"op": "command", "client": 0, "variant": "SwapViews",
     "args": {"slotA": {"viewportId": "v2"}, "slotB": {"viewportId": "v3"}}},
    {"op": "command", "client": 0, "variant": "HideView",
     "args": {"viewportId": "v2"}},
    {"op": "command", "client": 1, "variant": "SwapViews",
     "args": {"slotA": {"viewportId": "v4"}, "slotB": {"stackIndex": 0}}},
    {"op": "drain"},
    {"op": "insertAuto", "client": 0, "choice": 1, "contentId": "c9"},
    {"op": "command", "client": 0, "variant": "MaximizeView",
     "args": {"viewportId": "v4"}},
    {"op": "command", "client": 0, "variant": "RestoreView", "args": {}},
    {"op": "command", "client": 1, "variant": "AddNote",
     "args": {"contentId": "c7", "text": "tread pattern looks off on page 12"}},
    {"op": "command", "client": 0, "variant": "AddNote",
     "args": {"contentId": "c9", "text": "compare with last year's build"}},
    {"op": "drain"},
    {"op": "command", "client": 0, "variant": "DeleteNote", "args": {"noteId": "n13"}},
    {"op": "command", "client": 1, "variant": "CreateWall",
     "args": {"name": "scenario B", "gridCols": 8, "gridRows": 6}},
    {"op": "drain"},
    {"op": "command", "client": 1, "variant": "SwitchActiveWall",
     "args": {"wallId": "w14"}},
    {"op": "command", "client": 1, "variant": "ApplyPreset",
     "args": {"wallId": "w14", "viewCount": 2, "variantIndex": 1}},
    {"op": "command", "client": 0, "variant": "RenameWall",
     "args": {"wallId": "w14", "name": "follow-ups"}},
    {"op": "command", "client": 0, "variant": "DeleteView",
     "args": {"viewportId": "v3"}},
    {"op": "drain"},
]

RUNS = [
    ("tour", Scenario(seed=100, clients=2, script=FEATURE_TOUR)),
    ("layout-mix", Scenario(seed=101, clients=2, commands=90)),
    ("content-heavy", Scenario(seed=202, clients=3, commands=120)),
    ("churny", Scenario(seed=303, clients=3, commands=110)),
    ("duplicates", Scenario(seed=404, clients=2, commands=80, duplicate_rate=0.5)),
]


def export_one(name: str, scenario: Scenario, out_dir: Path) -> dict:
    server = InProcessServer(user_count=max(scenario.clients, 2))
    try:
        report = run_scenario(scenario, server)
        assert report.ok, f"{name}: {report.to_text()}"
        store = SessionStore(FileStorage(server.storage_root), report.session_id)
        restored = store.restore()
        header = json.loads(
            Path(server.storage_root, "sessions", report.session_id,
                 "journal.log").read_text().splitlines()[0])
        final = canonical_text(restored.session.to_dict())
        doc = {
            "name": name,
            "genesis": header["genesis"],
            "events": [event.to_dict() for event in restored.events],
            "finalCanonical": final,
            "finalStateHash": state_hash(restored.session.to_dict()),
        }
        out = out_dir / f"{name}.json"
        out.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n",
                       encoding="utf-8")
        return doc
    finally:
        server.shutdown()


def main() -> int:
    out_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else (
        Path(__file__).resolve().parent.parent / "frontend" / "golden")
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, scenario in RUNS:
        doc = export_one(name, scenario, out_dir)
        print(f"{name}: {len(doc['events'])} events -> {doc['finalStateHash'][:12]}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
