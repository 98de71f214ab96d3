"""Grid layout algebra for a single virtual wall.

Every operation here is a pure function over immutable wall values: presets,
custom layouts, insert-candidate enumeration, swap, maximize, hide, delete.
Geometry lives on an integer cell grid (default 12x12) so invariants are
exactly checkable; pixel mapping is a client concern.

Viewports never overlap. Contents are never destroyed by a layout edit: hide
and delete push a viewport's content onto the wall's hidden stack (index 0 is
the most recently hidden).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Sequence, Union

from .canonical import canonical_text, fnv1a64
from .errors import LayoutError, Reason

DEFAULT_GRID_COLS = 12
DEFAULT_GRID_ROWS = 12
MAX_GRID_CELLS_PER_AXIS = 64


@dataclass(frozen=True, slots=True)
class GridRect:
    """An integer cell rectangle: origin (col, row), spans in cells."""

    col: int
    row: int
    col_span: int
    row_span: int

    @property
    def area(self) -> int:
        return self.col_span * self.row_span

    def contains(self, other: "GridRect") -> bool:
        return (
            self.col <= other.col
            and self.row <= other.row
            and self.col + self.col_span >= other.col + other.col_span
            and self.row + self.row_span >= other.row + other.row_span
        )

    def overlaps(self, other: "GridRect") -> bool:
        return (
            self.col < other.col + other.col_span
            and other.col < self.col + self.col_span
            and self.row < other.row + other.row_span
            and other.row < self.row + self.row_span
        )

    def to_dict(self) -> dict:
        return {
            "col": self.col,
            "row": self.row,
            "colSpan": self.col_span,
            "rowSpan": self.row_span,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GridRect":
        return cls(data["col"], data["row"], data["colSpan"], data["rowSpan"])


@dataclass(frozen=True, slots=True)
class Viewport:
    id: str
    rect: GridRect
    content_id: str | None = None

    def to_dict(self) -> dict:
        return {"id": self.id, "rect": self.rect.to_dict(), "contentId": self.content_id}

    @classmethod
    def from_dict(cls, data: dict) -> "Viewport":
        return cls(data["id"], GridRect.from_dict(data["rect"]), data.get("contentId"))


@dataclass(frozen=True, slots=True)
class VirtualWall:
    """One layout surface: viewports, hidden-content stack, maximize flag."""

    id: str
    name: str
    grid_cols: int = DEFAULT_GRID_COLS
    grid_rows: int = DEFAULT_GRID_ROWS
    viewports: tuple[Viewport, ...] = ()
    hidden_stack: tuple[str, ...] = ()
    maximized_viewport_id: str | None = None

    def viewport(self, viewport_id: str) -> Viewport | None:
        for vp in self.viewports:
            if vp.id == viewport_id:
                return vp
        return None

    def content_ids(self) -> Counter:
        """Multiset of every content on the wall (visible plus hidden)."""
        counts = Counter(vp.content_id for vp in self.viewports if vp.content_id)
        counts.update(self.hidden_stack)
        return counts

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "gridCols": self.grid_cols,
            "gridRows": self.grid_rows,
            "viewports": [vp.to_dict() for vp in self.viewports],
            "hiddenStack": list(self.hidden_stack),
            "maximizedViewportId": self.maximized_viewport_id,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "VirtualWall":
        return cls(
            id=data["id"],
            name=data["name"],
            grid_cols=data["gridCols"],
            grid_rows=data["gridRows"],
            viewports=tuple(Viewport.from_dict(v) for v in data["viewports"]),
            hidden_stack=tuple(data["hiddenStack"]),
            maximized_viewport_id=data.get("maximizedViewportId"),
        )


class CandidateKind(str, Enum):
    EMPTY_SPACE = "EmptySpace"
    HALVE = "Halve"
    SHRINK_BETWEEN = "ShrinkBetween"

    def __str__(self) -> str:
        return self.value


_KIND_PRIORITY = {
    CandidateKind.EMPTY_SPACE: 0,
    CandidateKind.HALVE: 1,
    CandidateKind.SHRINK_BETWEEN: 2,
}


@dataclass(frozen=True, slots=True)
class InsertCandidate:
    """A validated placement option for one new viewport.

    ``wall_geometry_hash`` pins the candidate to the exact wall geometry it
    was enumerated from; applying it against any other geometry fails with
    StaleCandidate instead of corrupting the layout.
    """

    kind: CandidateKind
    new_rect: GridRect
    resized_viewports: tuple[tuple[str, GridRect], ...]
    score: float
    wall_geometry_hash: str

    def geometry_key(self) -> tuple:
        return (self.new_rect, frozenset(self.resized_viewports))

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "newRect": self.new_rect.to_dict(),
            "resizedViewports": [
                {"viewportId": vid, "newRect": rect.to_dict()}
                for vid, rect in self.resized_viewports
            ],
            "score": self.score,
            "wallGeometryHash": self.wall_geometry_hash,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "InsertCandidate":
        return cls(
            kind=CandidateKind(data["kind"]),
            new_rect=GridRect.from_dict(data["newRect"]),
            resized_viewports=tuple(
                (entry["viewportId"], GridRect.from_dict(entry["newRect"]))
                for entry in data["resizedViewports"]
            ),
            score=data["score"],
            wall_geometry_hash=data["wallGeometryHash"],
        )


@dataclass(frozen=True, slots=True)
class PresetLayout:
    """A full-coverage tiling for a given view count."""

    view_count: int
    variant_index: int
    rects: tuple[GridRect, ...]
    label: str = ""

    def to_dict(self) -> dict:
        return {
            "viewCount": self.view_count,
            "variantIndex": self.variant_index,
            "rects": [r.to_dict() for r in self.rects],
            "label": self.label,
        }


@dataclass(frozen=True, slots=True)
class Violation:
    kind: str  # OutOfBounds | Overlap | BadShape
    index: int
    other_index: int | None = None
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "index": self.index,
            "otherIndex": self.other_index,
            "detail": self.detail,
        }


@dataclass(frozen=True, slots=True)
class LayoutValidation:
    ok: bool
    violations: tuple[Violation, ...] = ()


# A swap slot is either a visible viewport id or a hidden-stack index.
Slot = Union[str, int]


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def validate_layout(
    grid_cols: int, grid_rows: int, rects: Sequence[GridRect]
) -> LayoutValidation:
    """Check bounds and pairwise disjointness; report every violation found."""
    violations: list[Violation] = []
    for i, rect in enumerate(rects):
        if rect.col_span < 1 or rect.row_span < 1:
            violations.append(
                Violation("BadShape", i, detail=f"spans must be >=1, got {rect}")
            )
            continue
        if (
            rect.col < 0
            or rect.row < 0
            or rect.col + rect.col_span > grid_cols
            or rect.row + rect.row_span > grid_rows
        ):
            violations.append(
                Violation(
                    "OutOfBounds",
                    i,
                    detail=f"{rect} exceeds {grid_cols}x{grid_rows} grid",
                )
            )
    for i in range(len(rects)):
        for j in range(i + 1, len(rects)):
            if rects[i].overlaps(rects[j]):
                violations.append(
                    Violation("Overlap", i, j, detail=f"{rects[i]} overlaps {rects[j]}")
                )
    return LayoutValidation(ok=not violations, violations=tuple(violations))


def wall_violations(wall: VirtualWall) -> list[str]:
    """Full invariant audit of one wall; empty list means the wall is sound."""
    problems: list[str] = []
    if wall.grid_cols < 1 or wall.grid_rows < 1:
        problems.append(f"wall {wall.id}: grid {wall.grid_cols}x{wall.grid_rows} invalid")
        return problems
    layout = validate_layout(
        wall.grid_cols, wall.grid_rows, [vp.rect for vp in wall.viewports]
    )
    for violation in layout.violations:
        problems.append(f"wall {wall.id}: {violation.kind} {violation.detail}")
    ids = [vp.id for vp in wall.viewports]
    if len(set(ids)) != len(ids):
        problems.append(f"wall {wall.id}: duplicate viewport ids")
    if wall.maximized_viewport_id is not None and wall.viewport(
        wall.maximized_viewport_id
    ) is None:
        problems.append(
            f"wall {wall.id}: maximized viewport {wall.maximized_viewport_id} missing"
        )
    counts = wall.content_ids()
    for content_id, count in counts.items():
        if count > 1:
            problems.append(f"wall {wall.id}: content {content_id} appears {count} times")
    if any(entry is None or entry == "" for entry in wall.hidden_stack):
        problems.append(f"wall {wall.id}: hidden stack holds an empty entry")
    return problems


def _guard(wall: VirtualWall) -> VirtualWall:
    problems = wall_violations(wall)
    if problems:
        raise LayoutError(Reason.INTERNAL_GEOMETRY_ERROR, "; ".join(problems))
    return wall


# ---------------------------------------------------------------------------
# Presets
# ---------------------------------------------------------------------------


def _split(total: int, parts: int) -> list[int] | None:
    """Split ``total`` cells into ``parts`` near-equal spans (larger first)."""
    if parts < 1 or parts > total:
        return None
    base, extra = divmod(total, parts)
    return [base + 1 if i < extra else base for i in range(parts)]


def _grid_variant(rows: int, cols: int, grid_cols: int, grid_rows: int):
    col_spans = _split(grid_cols, cols)
    row_spans = _split(grid_rows, rows)
    if col_spans is None or row_spans is None:
        return None
    rects = []
    y = 0
    for rs in row_spans:
        x = 0
        for cs in col_spans:
            rects.append(GridRect(x, y, cs, rs))
            x += cs
        y += rs
    return rects


def _hero_left_variant(count: int, grid_cols: int, grid_rows: int):
    halves = _split(grid_cols, 2)
    side_rows = _split(grid_rows, count - 1)
    if halves is None or side_rows is None:
        return None
    rects = [GridRect(0, 0, halves[0], grid_rows)]
    y = 0
    for rs in side_rows:
        rects.append(GridRect(halves[0], y, halves[1], rs))
        y += rs
    return rects


def _hero_top_variant(count: int, grid_cols: int, grid_rows: int):
    halves = _split(grid_rows, 2)
    bottom_cols = _split(grid_cols, count - 1)
    if halves is None or bottom_cols is None:
        return None
    rects = [GridRect(0, 0, grid_cols, halves[0])]
    x = 0
    for cs in bottom_cols:
        rects.append(GridRect(x, halves[0], cs, halves[1]))
        x += cs
    return rects


def _two_rows_variant(count: int, grid_cols: int, grid_rows: int):
    halves = _split(grid_rows, 2)
    top = (count + 1) // 2
    bottom = count - top
    top_cols = _split(grid_cols, top)
    bottom_cols = _split(grid_cols, bottom)
    if halves is None or top_cols is None or bottom_cols is None:
        return None
    rects = []
    x = 0
    for cs in top_cols:
        rects.append(GridRect(x, 0, cs, halves[0]))
        x += cs
    x = 0
    for cs in bottom_cols:
        rects.append(GridRect(x, halves[0], cs, halves[1]))
        x += cs
    return rects


def preset_catalog(
    view_count: int,
    grid_cols: int = DEFAULT_GRID_COLS,
    grid_rows: int = DEFAULT_GRID_ROWS,
) -> list[PresetLayout]:
    """Deterministic catalog of full-coverage layouts for 1..9 views."""
    if not 1 <= view_count <= 9:
        raise LayoutError(
            Reason.UNSUPPORTED_PRESET_COUNT, f"viewCount {view_count} not in 1..9"
        )
    raw: list[tuple[str, list[GridRect]]] = []
    for rows in range(1, view_count + 1):
        if view_count % rows:
            continue
        cols = view_count // rows
        rects = _grid_variant(rows, cols, grid_cols, grid_rows)
        if rects is not None:
            raw.append((f"grid-{rows}x{cols}", rects))
    if view_count >= 3:
        for label, builder in (
            ("hero-left", _hero_left_variant),
            ("hero-top", _hero_top_variant),
        ):
            rects = builder(view_count, grid_cols, grid_rows)
            if rects is not None:
                raw.append((label, rects))
        if view_count % 2:
            rects = _two_rows_variant(view_count, grid_cols, grid_rows)
            if rects is not None:
                raw.append(("two-rows", rects))

    presets: list[PresetLayout] = []
    seen: set[tuple] = set()
    for label, rects in raw:
        ordered = tuple(sorted(rects, key=lambda r: (r.row, r.col)))
        if ordered in seen:
            continue
        seen.add(ordered)
        presets.append(PresetLayout(view_count, len(presets), ordered, label))
    if not presets:
        raise LayoutError(
            Reason.UNSUPPORTED_PRESET_COUNT,
            f"{view_count} views cannot tile a {grid_cols}x{grid_rows} grid",
        )
    return presets


# ---------------------------------------------------------------------------
# Custom layout wizard
# ---------------------------------------------------------------------------


def build_custom_step(
    partial: Sequence[GridRect],
    next_rect: GridRect,
    grid_cols: int,
    grid_rows: int,
) -> tuple[GridRect, ...]:
    """Extend a custom-layout preview by one rectangle, or reject it."""
    result = validate_layout(grid_cols, grid_rows, [*partial, next_rect])
    if not result.ok:
        detail = "; ".join(f"{v.kind}: {v.detail}" for v in result.violations)
        raise LayoutError(Reason.REJECTED_RECT, detail)
    return (*partial, next_rect)


# ---------------------------------------------------------------------------
# Empty space and insert candidates
# ---------------------------------------------------------------------------


def _occupancy(wall: VirtualWall) -> list[list[bool]]:
    grid = [[False] * wall.grid_cols for _ in range(wall.grid_rows)]
    for vp in wall.viewports:
        r = vp.rect
        for y in range(r.row, r.row + r.row_span):
            row = grid[y]
            for x in range(r.col, r.col + r.col_span):
                row[x] = True
    return grid


def maximal_empty_rectangles(wall: VirtualWall) -> list[GridRect]:
    """Every empty rectangle not contained in a larger empty rectangle.

    Histogram sweep: per bottom row r, heights[c] is the run of empty cells
    ending at (r, c). For a column span the only rectangle that can be maximal
    is the one at the span's minimum run height (anything lower could grow
    up), and it is maximal exactly when the adjacent columns have shorter runs
    and the row below is blocked. Each maximal rectangle is found once, at its
    own bottom row. Row-major output order.
    """
    cols, rows = wall.grid_cols, wall.grid_rows
    occ = _occupancy(wall)
    heights = [0] * cols
    found: list[GridRect] = []
    for r in range(rows):
        occ_row = occ[r]
        for c in range(cols):
            heights[c] = 0 if occ_row[c] else heights[c] + 1
        if r + 1 < rows:
            below = occ[r + 1]
            below_free = [0] * (cols + 1)  # prefix count of EMPTY cells below
            for c in range(cols):
                below_free[c + 1] = below_free[c] + (0 if below[c] else 1)
        else:
            below_free = None
        for left in range(cols):
            if heights[left] == 0:
                continue
            h = heights[left]
            for right in range(left, cols):
                if heights[right] == 0:
                    break
                if heights[right] < h:
                    h = heights[right]
                if left > 0 and heights[left - 1] >= h:
                    continue  # grows left
                if right + 1 < cols and heights[right + 1] >= h:
                    continue  # grows right
                if below_free is not None and (
                    below_free[right + 1] - below_free[left] == right - left + 1
                ):
                    continue  # grows down
                found.append(GridRect(left, r - h + 1, right - left + 1, h))
    found.sort(key=lambda rect: (rect.row, rect.col, rect.row_span, rect.col_span))
    return found


def geometry_hash(wall: VirtualWall) -> str:
    """Hash of the wall's geometry only; content assignment does not change it."""
    doc = {
        "gridCols": wall.grid_cols,
        "gridRows": wall.grid_rows,
        "maximized": wall.maximized_viewport_id,
        "viewports": sorted(
            [vp.id, vp.rect.col, vp.rect.row, vp.rect.col_span, vp.rect.row_span]
            for vp in wall.viewports
        ),
    }
    return fnv1a64(canonical_text(doc))


def _halve_candidates(wall: VirtualWall) -> Iterable[tuple[GridRect, tuple]]:
    for vp in wall.viewports:
        r = vp.rect
        if r.col_span >= 2:
            keep = (r.col_span + 1) // 2
            yield (
                GridRect(r.col + keep, r.row, r.col_span - keep, r.row_span),
                ((vp.id, GridRect(r.col, r.row, keep, r.row_span)),),
            )
        if r.row_span >= 2:
            keep = (r.row_span + 1) // 2
            yield (
                GridRect(r.col, r.row + keep, r.col_span, r.row_span - keep),
                ((vp.id, GridRect(r.col, r.row, r.col_span, keep)),),
            )


def _shrink_between_candidates(wall: VirtualWall) -> Iterable[tuple[GridRect, tuple]]:
    vps = wall.viewports
    for a in vps:
        for b in vps:
            ra, rb = a.rect, b.rect
            if (
                ra.col + ra.col_span == rb.col
                and ra.row == rb.row
                and ra.row_span == rb.row_span
                and ra.col_span >= 2
                and rb.col_span >= 2
            ):
                yield (
                    GridRect(ra.col + ra.col_span - 1, ra.row, 2, ra.row_span),
                    (
                        (a.id, GridRect(ra.col, ra.row, ra.col_span - 1, ra.row_span)),
                        (b.id, GridRect(rb.col + 1, rb.row, rb.col_span - 1, rb.row_span)),
                    ),
                )
            if (
                ra.row + ra.row_span == rb.row
                and ra.col == rb.col
                and ra.col_span == rb.col_span
                and ra.row_span >= 2
                and rb.row_span >= 2
            ):
                yield (
                    GridRect(ra.col, ra.row + ra.row_span - 1, ra.col_span, 2),
                    (
                        (a.id, GridRect(ra.col, ra.row, ra.col_span, ra.row_span - 1)),
                        (b.id, GridRect(rb.col, rb.row + 1, rb.col_span, rb.row_span - 1)),
                    ),
                )


def _candidate_sort_key(candidate: InsertCandidate) -> tuple:
    rect = candidate.new_rect
    return (
        _KIND_PRIORITY[candidate.kind],
        -rect.area,
        rect.row,
        rect.col,
        rect.row_span,
        rect.col_span,
        tuple(sorted(vid for vid, _ in candidate.resized_viewports)),
    )


def enumerate_insert_candidates(wall: VirtualWall) -> list[InsertCandidate]:
    """All legal placements for one new view, best first.

    Priority order: whole maximal empty rectangles, then halving a viewport
    (the existing view keeps the leading, larger half), then pinching one cell
    line from each of two aligned neighbours to open a two-cell gap.
    """
    if wall.maximized_viewport_id is not None:
        raise LayoutError(Reason.WALL_MAXIMIZED, "restore the maximized view first")
    ghash = geometry_hash(wall)
    candidates: list[InsertCandidate] = []
    for rect in maximal_empty_rectangles(wall):
        candidates.append(
            InsertCandidate(CandidateKind.EMPTY_SPACE, rect, (), float(rect.area), ghash)
        )
    for rect, resized in _halve_candidates(wall):
        candidates.append(
            InsertCandidate(CandidateKind.HALVE, rect, resized, float(rect.area), ghash)
        )
    for rect, resized in _shrink_between_candidates(wall):
        candidates.append(
            InsertCandidate(
                CandidateKind.SHRINK_BETWEEN, rect, resized, float(rect.area), ghash
            )
        )
    candidates.sort(key=_candidate_sort_key)
    deduped: list[InsertCandidate] = []
    seen: set[tuple] = set()
    for candidate in candidates:
        key = candidate.geometry_key()
        if key in seen:
            continue
        seen.add(key)
        deduped.append(candidate)
    if not deduped:
        raise LayoutError(Reason.NO_PLACEMENT_AVAILABLE, "wall is saturated")
    return deduped


def apply_insert(
    wall: VirtualWall,
    candidate: InsertCandidate,
    new_viewport_id: str,
    content_id: str | None = None,
) -> VirtualWall:
    """Apply a previously enumerated candidate, adding one new viewport."""
    if candidate.wall_geometry_hash != geometry_hash(wall):
        raise LayoutError(
            Reason.STALE_CANDIDATE, "wall geometry changed since enumeration"
        )
    if wall.viewport(new_viewport_id) is not None:
        raise LayoutError(
            Reason.INTERNAL_GEOMETRY_ERROR, f"viewport id {new_viewport_id} taken"
        )
    if content_id is not None and wall.content_ids().get(content_id):
        raise LayoutError(
            Reason.CONTENT_IN_USE, f"content {content_id} already on wall {wall.id}"
        )
    resize_map = dict(candidate.resized_viewports)
    viewports = []
    for vp in wall.viewports:
        if vp.id in resize_map:
            viewports.append(replace(vp, rect=resize_map.pop(vp.id)))
        else:
            viewports.append(vp)
    if resize_map:
        raise LayoutError(
            Reason.INTERNAL_GEOMETRY_ERROR,
            f"candidate resizes unknown viewports {sorted(resize_map)}",
        )
    viewports.append(Viewport(new_viewport_id, candidate.new_rect, content_id))
    return _guard(replace(wall, viewports=tuple(viewports)))


# ---------------------------------------------------------------------------
# Swap / maximize / hide / delete
# ---------------------------------------------------------------------------


def _resolve_slot(wall: VirtualWall, slot: Slot) -> tuple[str, int]:
    """Return ('viewport', index) or ('stack', index); NoSuchSlot otherwise."""
    if isinstance(slot, bool) or not isinstance(slot, (str, int)):
        raise LayoutError(Reason.NO_SUCH_SLOT, f"bad slot {slot!r}")
    if isinstance(slot, str):
        for i, vp in enumerate(wall.viewports):
            if vp.id == slot:
                return ("viewport", i)
        raise LayoutError(Reason.NO_SUCH_SLOT, f"no viewport {slot!r}")
    if 0 <= slot < len(wall.hidden_stack):
        return ("stack", slot)
    raise LayoutError(Reason.NO_SUCH_SLOT, f"no hidden slot #{slot}")


def swap_views(wall: VirtualWall, slot_a: Slot, slot_b: Slot) -> VirtualWall:
    """Exchange the contents of two slots; geometry and stack order unchanged.

    Swapping an occupied viewport with a hidden slot exchanges contents in
    place. Swapping an *empty* viewport with a hidden slot moves the hidden
    content into the viewport and drops that stack entry, which makes swap the
    exact inverse of hide.
    """
    kind_a, idx_a = _resolve_slot(wall, slot_a)
    kind_b, idx_b = _resolve_slot(wall, slot_b)
    if (kind_a, idx_a) == (kind_b, idx_b):
        return wall  # self-swap is the identity
    viewports = list(wall.viewports)
    stack = list(wall.hidden_stack)

    def get(kind: str, idx: int) -> str | None:
        return viewports[idx].content_id if kind == "viewport" else stack[idx]

    def put(kind: str, idx: int, content: str) -> None:
        if kind == "viewport":
            viewports[idx] = replace(viewports[idx], content_id=content)
        else:
            stack[idx] = content

    content_a = get(kind_a, idx_a)
    content_b = get(kind_b, idx_b)
    if kind_a == kind_b:  # viewport<->viewport or stack<->stack: plain exchange
        if kind_a == "viewport":
            viewports[idx_a] = replace(viewports[idx_a], content_id=content_b)
            viewports[idx_b] = replace(viewports[idx_b], content_id=content_a)
        else:
            stack[idx_a], stack[idx_b] = stack[idx_b], stack[idx_a]
    else:
        vp_kind, vp_idx = (kind_a, idx_a) if kind_a == "viewport" else (kind_b, idx_b)
        st_idx = idx_b if kind_a == "viewport" else idx_a
        vp_content = get("viewport", vp_idx)
        if vp_content is None:
            put("viewport", vp_idx, stack[st_idx])
            del stack[st_idx]  # nothing to leave behind: unhide is a move
        else:
            put("viewport", vp_idx, stack[st_idx])
            stack[st_idx] = vp_content
    return _guard(
        replace(wall, viewports=tuple(viewports), hidden_stack=tuple(stack))
    )


def maximize_view(wall: VirtualWall, viewport_id: str) -> VirtualWall:
    """Flag one viewport as covering the whole surface; rects stay untouched."""
    if wall.maximized_viewport_id is not None:
        raise LayoutError(
            Reason.ALREADY_MAXIMIZED, f"{wall.maximized_viewport_id} is maximized"
        )
    if wall.viewport(viewport_id) is None:
        raise LayoutError(Reason.NO_SUCH_SLOT, f"no viewport {viewport_id!r}")
    return replace(wall, maximized_viewport_id=viewport_id)


def restore_view(wall: VirtualWall) -> VirtualWall:
    if wall.maximized_viewport_id is None:
        raise LayoutError(Reason.NOT_MAXIMIZED, "no view is maximized")
    return replace(wall, maximized_viewport_id=None)


def hide_view(wall: VirtualWall, viewport_id: str) -> VirtualWall:
    """Move a viewport's content to the top of the hidden stack."""
    vp = wall.viewport(viewport_id)
    if vp is None:
        raise LayoutError(Reason.NO_SUCH_SLOT, f"no viewport {viewport_id!r}")
    if vp.content_id is None:
        raise LayoutError(Reason.NOTHING_TO_HIDE, f"viewport {viewport_id} is empty")
    viewports = tuple(
        replace(v, content_id=None) if v.id == viewport_id else v
        for v in wall.viewports
    )
    return _guard(
        replace(
            wall,
            viewports=viewports,
            hidden_stack=(vp.content_id, *wall.hidden_stack),
        )
    )


def delete_view(wall: VirtualWall, viewport_id: str) -> VirtualWall:
    """Remove a viewport; its content survives on the hidden stack."""
    vp = wall.viewport(viewport_id)
    if vp is None:
        raise LayoutError(Reason.NO_SUCH_SLOT, f"no viewport {viewport_id!r}")
    viewports = tuple(v for v in wall.viewports if v.id != viewport_id)
    stack = (vp.content_id, *wall.hidden_stack) if vp.content_id else wall.hidden_stack
    maximized = wall.maximized_viewport_id
    if maximized == viewport_id:
        maximized = None
    return _guard(
        replace(
            wall,
            viewports=viewports,
            hidden_stack=stack,
            maximized_viewport_id=maximized,
        )
    )
