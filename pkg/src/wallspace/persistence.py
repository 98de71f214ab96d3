"""Real-time durability: append-only event journal plus periodic snapshots.

Write-ahead rule: a command's journal record is flushed to the store before
its event is broadcast or the in-memory state is committed. If the store
refuses the write, the command is rejected and the state is unchanged.

File formats (both versioned, both canonical text):

- ``journal.log``: first line is a header ``{"formatVersion":1,"genesis":...,
  "sessionId":...}`` carrying the initial session document, then one record
  per line: ``{"actorId","crc","event","seq","serverTime"}``. ``crc`` is the
  CRC-32 of the record's canonical form without the crc field, so a corrupted
  tail is detected and cleanly truncated on restore.
- ``snapshot-<version>.snap``: one canonical document line plus a trailing
  ``sha256:<hex>`` checksum line.

Uploaded files live in a content-addressed blob directory: the sha256 of the
bytes names the blob, so re-uploads deduplicate.
"""

from __future__ import annotations

import hashlib
import json
import os
import zlib
from dataclasses import dataclass
from pathlib import Path
from .canonical import canonical_text
from .errors import JournalGap, RestoreFailed, StorageUnavailable
from .session import Event, Session, apply_event

JOURNAL_FORMAT_VERSION = 1
SNAPSHOT_FORMAT_VERSION = 1


# ---------------------------------------------------------------------------
# Storage backend (pluggable so tests can inject failures)
# ---------------------------------------------------------------------------


class LineAppender:
    def write_line(self, text: str) -> None:
        raise NotImplementedError

    def close(self) -> None:
        raise NotImplementedError


class _FileAppender(LineAppender):
    def __init__(self, path: Path):
        self._handle = open(path, "a", encoding="utf-8")

    def write_line(self, text: str) -> None:
        try:
            self._handle.write(text + "\n")
            self._handle.flush()
        except OSError as exc:
            raise StorageUnavailable(str(exc)) from exc

    def close(self) -> None:
        self._handle.close()


class FileStorage:
    """Plain-file backend rooted at one directory."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _resolve(self, rel: str) -> Path:
        return self.root / rel

    def exists(self, rel: str) -> bool:
        return self._resolve(rel).exists()

    def listdir(self, rel: str) -> list[str]:
        path = self._resolve(rel)
        return sorted(p.name for p in path.iterdir()) if path.is_dir() else []

    def makedirs(self, rel: str) -> None:
        self._resolve(rel).mkdir(parents=True, exist_ok=True)

    def read_text(self, rel: str) -> str:
        try:
            return self._resolve(rel).read_text(encoding="utf-8")
        except OSError as exc:
            raise StorageUnavailable(str(exc)) from exc

    def write_text(self, rel: str, text: str) -> None:
        path = self._resolve(rel)
        tmp = path.with_suffix(path.suffix + ".tmp")
        try:
            tmp.write_text(text, encoding="utf-8")
            os.replace(tmp, path)
        except OSError as exc:
            raise StorageUnavailable(str(exc)) from exc

    def read_bytes(self, rel: str) -> bytes:
        try:
            return self._resolve(rel).read_bytes()
        except OSError as exc:
            raise StorageUnavailable(str(exc)) from exc

    def write_bytes(self, rel: str, data: bytes) -> None:
        path = self._resolve(rel)
        tmp = path.with_suffix(path.suffix + ".tmp")
        try:
            tmp.write_bytes(data)
            os.replace(tmp, path)
        except OSError as exc:
            raise StorageUnavailable(str(exc)) from exc

    def remove(self, rel: str) -> None:
        try:
            self._resolve(rel).unlink(missing_ok=True)
        except OSError as exc:
            raise StorageUnavailable(str(exc)) from exc

    def open_appender(self, rel: str) -> LineAppender:
        try:
            return _FileAppender(self._resolve(rel))
        except OSError as exc:
            raise StorageUnavailable(str(exc)) from exc


# ---------------------------------------------------------------------------
# Journal records
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class JournalRecord:
    seq: int
    server_time: int
    actor_id: str
    event: Event

    def to_line(self) -> str:
        body = {
            "seq": self.seq,
            "serverTime": self.server_time,
            "actorId": self.actor_id,
            "event": self.event.to_dict(),
        }
        crc = zlib.crc32(canonical_text(body).encode("utf-8"))
        body["crc"] = f"{crc:08x}"
        return canonical_text(body)

    @classmethod
    def from_event(cls, event: Event) -> "JournalRecord":
        return cls(event.seq, event.server_time, event.actor_id, event)

    @classmethod
    def parse_line(cls, line: str) -> "JournalRecord":
        """Parse and integrity-check one record line; raises ValueError if bad."""
        data = json.loads(line)
        if not isinstance(data, dict):
            raise ValueError("record is not an object")
        crc_field = data.pop("crc", None)
        expected = f"{zlib.crc32(canonical_text(data).encode('utf-8')):08x}"
        if crc_field != expected:
            raise ValueError(f"crc mismatch: {crc_field} != {expected}")
        event = Event.from_dict(data["event"])
        record = cls(data["seq"], data["serverTime"], data["actorId"], event)
        if record.seq != event.seq:
            raise ValueError("record seq disagrees with event seq")
        return record


# ---------------------------------------------------------------------------
# Per-session store
# ---------------------------------------------------------------------------


@dataclass
class RestoreResult:
    session: Session
    source: str  # "snapshot:<version>" or "genesis"
    replayed: int
    truncated_at: int | None  # last valid seq if a corrupt tail was dropped
    events: list[Event] = None  # every journal event still on disk, oldest first


def _snapshot_name(version: int) -> str:
    return f"snapshot-{version:012d}.snap"


class SessionStore:
    """Journal + snapshots for one session under ``sessions/<id>/``."""

    SNAPSHOTS_KEPT = 3

    def __init__(self, backend: FileStorage, session_id: str):
        self.backend = backend
        self.session_id = session_id
        self.dir = f"sessions/{session_id}"
        self._journal_path = f"{self.dir}/journal.log"
        self._appender: LineAppender | None = None
        self._last_seq: int | None = None
        self._first_seq: int | None = None

    # -- lifecycle ---------------------------------------------------------

    def exists(self) -> bool:
        return self.backend.exists(self._journal_path) or bool(self._snapshot_versions())

    def initialize(self, session: Session, captured_at: int) -> None:
        """Create the journal with its genesis header and a version-0 snapshot."""
        self.backend.makedirs(self.dir)
        header = {
            "formatVersion": JOURNAL_FORMAT_VERSION,
            "sessionId": session.id,
            "genesis": session.to_dict(),
        }
        self.backend.write_text(self._journal_path, canonical_text(header) + "\n")
        self._last_seq = session.version
        self._first_seq = None
        self.write_snapshot(session, captured_at)

    def close(self) -> None:
        if self._appender is not None:
            self._appender.close()
            self._appender = None

    # -- journal -----------------------------------------------------------

    def _scan_journal(self) -> tuple[dict, list[str], bool]:
        """Return (header, valid record lines, tail_corrupt)."""
        text = self.backend.read_text(self._journal_path)
        lines = text.split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        if not lines:
            raise RestoreFailed(f"journal for {self.session_id} is empty")
        try:
            header = json.loads(lines[0])
            if header.get("formatVersion") != JOURNAL_FORMAT_VERSION:
                raise ValueError(f"unsupported journal format {header.get('formatVersion')}")
        except (ValueError, TypeError) as exc:
            raise RestoreFailed(f"journal header unreadable: {exc}") from exc
        valid: list[str] = []
        prev_seq: int | None = None
        tail_corrupt = False
        for line in lines[1:]:
            try:
                record = JournalRecord.parse_line(line)
                if prev_seq is not None and record.seq != prev_seq + 1:
                    raise ValueError(f"seq {record.seq} after {prev_seq}")
            except (ValueError, KeyError, TypeError):
                tail_corrupt = True
                break  # everything after the first bad line is untrusted
            prev_seq = record.seq
            valid.append(line)
        return header, valid, tail_corrupt

    def _drop_corrupt_tail(self, header: dict, valid_lines: list[str]) -> None:
        text = "\n".join([canonical_text(header), *valid_lines]) + "\n"
        self.backend.write_text(self._journal_path, text)

    def append_event(self, event: Event) -> None:
        """Durably append one event; must happen before the event is broadcast."""
        if self._last_seq is None:
            raise JournalGap("journal not opened")
        if event.seq != self._last_seq + 1:
            raise JournalGap(f"append seq {event.seq} after {self._last_seq}")
        if self._appender is None:
            self._appender = self.backend.open_appender(self._journal_path)
        self._appender.write_line(JournalRecord.from_event(event).to_line())
        self._last_seq = event.seq
        if self._first_seq is None:
            self._first_seq = event.seq

    def read_events_after(self, seq: int) -> list[Event] | None:
        """Events with seq greater than the given one, or None if compacted away."""
        _, lines, _ = self._scan_journal()
        records = [JournalRecord.parse_line(line) for line in lines]
        if records and seq + 1 < records[0].seq:
            return None
        if not records and seq < (self._last_seq or 0):
            return None
        return [r.event for r in records if r.seq > seq]

    def compact(self, keep_after_seq: int) -> None:
        """Drop journal records at or below a seq (retention after snapshots)."""
        self.close()
        header, lines, _ = self._scan_journal()
        kept = [
            line for line in lines if JournalRecord.parse_line(line).seq > keep_after_seq
        ]
        self._drop_corrupt_tail(header, kept)
        self._first_seq = JournalRecord.parse_line(kept[0]).seq if kept else None

    # -- snapshots ----------------------------------------------------------

    def _snapshot_versions(self) -> list[int]:
        versions = []
        for name in self.backend.listdir(self.dir):
            if name.startswith("snapshot-") and name.endswith(".snap"):
                try:
                    versions.append(int(name[len("snapshot-") : -len(".snap")]))
                except ValueError:
                    continue
        return sorted(versions)

    def write_snapshot(self, session: Session, captured_at: int) -> None:
        doc = {
            "formatVersion": SNAPSHOT_FORMAT_VERSION,
            "version": session.version,
            "capturedAt": captured_at,
            "state": session.to_dict(),
        }
        line = canonical_text(doc)
        digest = hashlib.sha256(line.encode("utf-8")).hexdigest()
        self.backend.makedirs(self.dir)
        self.backend.write_text(
            f"{self.dir}/{_snapshot_name(session.version)}", f"{line}\nsha256:{digest}\n"
        )
        self._prune_snapshots()

    def _prune_snapshots(self) -> None:
        versions = self._snapshot_versions()
        if len(versions) <= self.SNAPSHOTS_KEPT:
            return
        for version in versions[: -self.SNAPSHOTS_KEPT]:
            self.backend.remove(f"{self.dir}/{_snapshot_name(version)}")

    def read_snapshot(self, version: int) -> Session:
        text = self.backend.read_text(f"{self.dir}/{_snapshot_name(version)}")
        lines = text.splitlines()
        if len(lines) < 2:
            raise ValueError("snapshot missing checksum line")
        body, checksum = lines[0], lines[1]
        digest = hashlib.sha256(body.encode("utf-8")).hexdigest()
        if checksum != f"sha256:{digest}":
            raise ValueError("snapshot checksum mismatch")
        doc = json.loads(body)
        if doc.get("formatVersion") != SNAPSHOT_FORMAT_VERSION:
            raise ValueError(f"unsupported snapshot format {doc.get('formatVersion')}")
        return Session.from_dict(doc["state"])

    # -- restore -------------------------------------------------------------

    def restore(self) -> RestoreResult:
        """Rebuild the session: newest valid snapshot plus journal replay.

        Falls back across corrupt snapshots, then to genesis replay when the
        full journal is still retained. A corrupt journal tail is truncated
        and reported, never replayed past.
        """
        if not self.exists():
            raise RestoreFailed(f"no snapshot and no journal for {self.session_id}")
        header, lines, tail_corrupt = self._scan_journal()
        records = [JournalRecord.parse_line(line) for line in lines]
        first_seq = records[0].seq if records else None
        last_seq = records[-1].seq if records else None

        base: Session | None = None
        source = ""
        for version in reversed(self._snapshot_versions()):
            # a snapshot is only usable if the journal can bridge it to the tail
            try:
                candidate = self.read_snapshot(version)
            except (ValueError, StorageUnavailable, KeyError, TypeError):
                continue
            if records and candidate.version < (first_seq or 1) - 1:
                continue
            base = candidate
            source = f"snapshot:{version}"
            break
        if base is None:
            genesis = header.get("genesis")
            if genesis is None or (first_seq is not None and first_seq != genesis["version"] + 1):
                raise RestoreFailed(
                    f"session {self.session_id}: no valid snapshot and journal "
                    "does not reach back to genesis"
                )
            base = Session.from_dict(genesis)
            source = "genesis"

        replayed = 0
        state = base
        for record in records:
            if record.seq <= state.version:
                continue
            state = apply_event(state, record.event)
            replayed += 1

        if tail_corrupt:
            self._drop_corrupt_tail(header, lines)
        self._last_seq = state.version if last_seq is None else max(last_seq, state.version)
        self._first_seq = first_seq
        return RestoreResult(
            session=state,
            source=source,
            replayed=replayed,
            truncated_at=(last_seq or base.version) if tail_corrupt else None,
            events=[r.event for r in records],
        )

    # -- retention maintenance ----------------------------------------------

    def snapshot_and_compact(self, session: Session, captured_at: int) -> int | None:
        """Write a snapshot, then drop journal records older than the
        second-newest snapshot (reconnect backlog keeps needing those).
        Returns the compaction cutoff seq, if any."""
        self.write_snapshot(session, captured_at)
        versions = self._snapshot_versions()
        if len(versions) >= 2:
            self.compact(keep_after_seq=versions[-2])
            return versions[-2]
        return None

    @property
    def last_seq(self) -> int | None:
        return self._last_seq


def list_session_ids(backend: FileStorage) -> list[str]:
    return [name for name in backend.listdir("sessions")]


# ---------------------------------------------------------------------------
# Content-addressed blobs
# ---------------------------------------------------------------------------


class BlobStore:
    """Uploads stored as ``blobs/<sha256>`` with a JSON sidecar of metadata."""

    def __init__(self, backend: FileStorage):
        self.backend = backend
        backend.makedirs("blobs")

    def put(self, data: bytes, media_type: str, file_name: str) -> str:
        digest = hashlib.sha256(data).hexdigest()
        blob_path = f"blobs/{digest}"
        if not self.backend.exists(blob_path):
            self.backend.write_bytes(blob_path, data)
            meta = {"mediaType": media_type, "fileName": file_name, "size": len(data)}
            self.backend.write_text(f"{blob_path}.meta.json", canonical_text(meta))
        return digest

    def get(self, digest: str) -> tuple[bytes, dict] | None:
        blob_path = f"blobs/{digest}"
        if not self.backend.exists(blob_path):
            return None
        data = self.backend.read_bytes(blob_path)
        meta = json.loads(self.backend.read_text(f"{blob_path}.meta.json"))
        return data, meta
