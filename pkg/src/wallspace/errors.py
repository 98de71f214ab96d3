"""Typed failure vocabulary shared by the layout engine, reducer, and server."""

from __future__ import annotations

from enum import Enum


class Reason(str, Enum):
    """Machine-readable rejection reasons carried on the wire and in tests."""

    # layout engine
    UNSUPPORTED_PRESET_COUNT = "UnsupportedPresetCount"
    REJECTED_RECT = "RejectedRect"
    NO_PLACEMENT_AVAILABLE = "NoPlacementAvailable"
    STALE_CANDIDATE = "StaleCandidate"
    INTERNAL_GEOMETRY_ERROR = "InternalGeometryError"
    NO_SUCH_SLOT = "NoSuchSlot"
    NOTHING_TO_HIDE = "NothingToHide"
    ALREADY_MAXIMIZED = "AlreadyMaximized"
    NOT_MAXIMIZED = "NotMaximized"
    WALL_MAXIMIZED = "WallMaximized"
    CONTENT_IN_USE = "ContentInUse"
    # session model
    INVALID_GRID = "InvalidGrid"
    INVALID_NAME = "InvalidName"
    NO_SUCH_ENTITY = "NoSuchEntity"
    INVALID_CONTENT = "InvalidContent"
    INVALID_CONTENT_STATE = "InvalidContentState"
    EMPTY_NOTE = "EmptyNote"
    MALFORMED = "Malformed"
    # server / persistence
    STORAGE_UNAVAILABLE = "StorageUnavailable"
    NO_SUCH_SESSION = "NoSuchSession"
    AUTH_FAILED = "AuthFailed"

    def __str__(self) -> str:  # keep wire payloads readable
        return self.value


class LayoutError(Exception):
    """Raised by layout-engine operations for contract violations."""

    def __init__(self, reason: Reason, detail: str = ""):
        self.reason = reason
        self.detail = detail
        super().__init__(f"{reason.value}: {detail}" if detail else reason.value)


class CommandRejected(Exception):
    """A command could not be applied; session state is unchanged."""

    def __init__(self, reason: Reason, detail: str = ""):
        self.reason = reason
        self.detail = detail
        super().__init__(f"{reason.value}: {detail}" if detail else reason.value)


class JournalGap(Exception):
    """Fatal bug guard: an append skipped a sequence number."""


class StorageUnavailable(Exception):
    """The backing store refused a write; the triggering command must be rejected."""


class RestoreFailed(Exception):
    """No snapshot or journal combination could rebuild the session."""
