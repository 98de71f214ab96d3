/**
 * Deterministic command reducer, semantically identical to the server's.
 *
 * Replicas rebuild server state by replaying events over a snapshot, so any
 * divergence here is an immediate consistency bug; the golden logs exported
 * from the server suite pin this module to byte-identical outcomes.
 */

import * as layout from "./layout.js";
import { LayoutError } from "./layout.js";
import {
  activeWall,
  CommandDoc,
  ContentDoc,
  ContentKind,
  EventDoc,
  SessionDoc,
  ViewStateDoc,
  WallDoc,
  wallById,
  wallContentIds,
} from "./model.js";

export class CommandRejectedError extends Error {
  constructor(public reason: string, public detail = "") {
    super(detail ? `${reason}: ${detail}` : reason);
  }
}

export interface CommandMeta {
  actorId: string;
  serverTime: number;
  requestId: string | null;
}

const MAX_GRID = 64;

function reject(reason: string, detail = ""): never {
  throw new CommandRejectedError(reason, detail);
}

function wantString(args: Record<string, unknown>, key: string,
                    optional = false): string | null {
  const value = args[key];
  if ((value === undefined || value === null) && optional) return null;
  if (typeof value !== "string") reject("Malformed", `field '${key}' must be a string`);
  return value;
}

function wantInt(args: Record<string, unknown>, key: string,
                 optional = false): number | null {
  const value = args[key];
  if ((value === undefined || value === null) && optional) return null;
  if (typeof value !== "number" || !Number.isInteger(value)) {
    reject("Malformed", `field '${key}' must be an integer`);
  }
  return value;
}

function wantNumber(args: Record<string, unknown>, key: string): number {
  const value = args[key];
  if (typeof value !== "number" || !Number.isFinite(value)) {
    reject("Malformed", `field '${key}' must be a number`);
  }
  return value;
}

function checkGrid(cols: number, rows: number): void {
  if (!Number.isInteger(cols) || !Number.isInteger(rows) ||
      cols < 1 || rows < 1 || cols > MAX_GRID || rows > MAX_GRID) {
    reject("InvalidGrid", `grid must be 1..${MAX_GRID} cells per axis`);
  }
}

function findWall(state: SessionDoc, args: Record<string, unknown>): WallDoc {
  const wallId = wantString(args, "wallId", true) ?? state.activeWallId;
  const wall = wallById(state, wallId);
  if (!wall) reject("NoSuchEntity", `no wall '${wallId}'`);
  return wall;
}

function swapWall(state: SessionDoc, wall: WallDoc): void {
  state.walls = state.walls.map((w) => (w.id === wall.id ? wall : w));
}

function alloc(state: SessionDoc, prefix: string): string {
  state.idCounter += 1;
  return `${prefix}${state.idCounter}`;
}

/** Matches the server's 6-decimal quantization of view-state numbers. */
function quantize(value: number): number {
  return Number(value.toFixed(6));
}

function parseSlot(raw: unknown): { viewportId: string } | { stackIndex: number } {
  if (raw && typeof raw === "object") {
    const slot = raw as Record<string, unknown>;
    if (typeof slot.viewportId === "string") return { viewportId: slot.viewportId };
    if (typeof slot.stackIndex === "number" && Number.isInteger(slot.stackIndex)) {
      return { stackIndex: slot.stackIndex };
    }
  }
  reject("Malformed", "slot must be {'viewportId': str} or {'stackIndex': int}");
}

function parseRect(raw: unknown): layout.Violation | { col: number; row: number; colSpan: number; rowSpan: number } {
  if (!raw || typeof raw !== "object") reject("Malformed", "rect must be an object");
  const rect = raw as Record<string, unknown>;
  for (const key of ["col", "row", "colSpan", "rowSpan"]) {
    if (typeof rect[key] !== "number" || !Number.isInteger(rect[key])) {
      reject("Malformed", "rect fields must be integers");
    }
  }
  return {
    col: rect.col as number, row: rect.row as number,
    colSpan: rect.colSpan as number, rowSpan: rect.rowSpan as number,
  };
}

// ---------------------------------------------------------------------------
// Handlers
// ---------------------------------------------------------------------------

type Handler = (state: SessionDoc, args: Record<string, unknown>,
                meta: CommandMeta) => Record<string, unknown>;

function assignLayout(state: SessionDoc, wall: WallDoc,
                      rects: { col: number; row: number; colSpan: number; rowSpan: number }[]): WallDoc {
  // carry contents over in viewport order; leftovers go to the hidden stack
  const visible = wall.viewports.map((vp) => vp.contentId)
    .filter((cid): cid is string => !!cid);
  const viewports = rects.map((rect) => ({
    id: alloc(state, "v"),
    rect: { ...rect },
    contentId: visible.length ? visible.shift()! : null,
  }));
  return {
    ...wall,
    viewports,
    hiddenStack: [...visible, ...wall.hiddenStack],
    maximizedViewportId: null,
  };
}

const handlers: Record<string, Handler> = {
  ApplyPreset(state, args) {
    const wall = findWall(state, args);
    const viewCount = wantInt(args, "viewCount")!;
    const variantIndex = wantInt(args, "variantIndex", true) ?? 0;
    const catalog = layout.presetCatalog(viewCount, wall.gridCols, wall.gridRows);
    if (variantIndex < 0 || variantIndex >= catalog.length) {
      reject("Malformed", `variantIndex ${variantIndex} out of range`);
    }
    swapWall(state, assignLayout(state, wall, catalog[variantIndex].rects));
    return { wallId: wall.id };
  },

  ApplyCustomLayout(state, args) {
    const wall = findWall(state, args);
    const raw = args.rects;
    if (!Array.isArray(raw) || !raw.length) {
      reject("Malformed", "rects must be a non-empty list");
    }
    const rects = raw.map(parseRect) as { col: number; row: number; colSpan: number; rowSpan: number }[];
    const violations = layout.validateLayout(wall.gridCols, wall.gridRows, rects);
    if (violations.length) {
      reject("RejectedRect", violations.map((v) => `${v.kind}: ${v.detail}`).join("; "));
    }
    swapWall(state, assignLayout(state, wall, rects));
    return { wallId: wall.id };
  },

  InsertView(state, args) {
    const wall = findWall(state, args);
    const raw = args.candidate;
    if (!raw || typeof raw !== "object") reject("Malformed", "candidate must be an object");
    const candidate = raw as unknown as layout.CandidateDoc;
    const contentId = wantString(args, "contentId", true);
    if (contentId !== null && !(contentId in state.contents)) {
      reject("NoSuchEntity", `no content '${contentId}'`);
    }
    const viewportId = alloc(state, "v");
    swapWall(state, layout.applyInsert(wall, candidate, viewportId, contentId));
    return { wallId: wall.id, viewportId };
  },

  SwapViews(state, args) {
    const wall = findWall(state, args);
    swapWall(state, layout.swapViews(wall, parseSlot(args.slotA), parseSlot(args.slotB)));
    return { wallId: wall.id };
  },

  MaximizeView(state, args) {
    const wall = findWall(state, args);
    swapWall(state, layout.maximizeView(wall, wantString(args, "viewportId")!));
    return { wallId: wall.id };
  },

  RestoreView(state, args) {
    const wall = findWall(state, args);
    swapWall(state, layout.restoreView(wall));
    return { wallId: wall.id };
  },

  HideView(state, args) {
    const wall = findWall(state, args);
    swapWall(state, layout.hideView(wall, wantString(args, "viewportId")!));
    return { wallId: wall.id };
  },

  DeleteView(state, args) {
    const wall = findWall(state, args);
    swapWall(state, layout.deleteView(wall, wantString(args, "viewportId")!));
    return { wallId: wall.id };
  },

  CreateWall(state, args) {
    const name = wantString(args, "name", true) ?? `Wall ${state.walls.length + 1}`;
    if (!name.trim()) reject("InvalidName", "wall name must be non-empty");
    const cols = wantInt(args, "gridCols", true) ?? state.defaultGridCols;
    const rows = wantInt(args, "gridRows", true) ?? state.defaultGridRows;
    checkGrid(cols, rows);
    const wallId = alloc(state, "w");
    state.walls = [...state.walls, {
      id: wallId, name, gridCols: cols, gridRows: rows,
      viewports: [], hiddenStack: [], maximizedViewportId: null,
    }];
    return { wallId };
  },

  RenameWall(state, args) {
    const wall = findWall(state, args);
    const name = wantString(args, "name")!;
    if (!name.trim()) reject("InvalidName", "wall name must be non-empty");
    swapWall(state, { ...wall, name });
    return { wallId: wall.id };
  },

  SwitchActiveWall(state, args) {
    const wallId = wantString(args, "wallId")!;
    if (!wallById(state, wallId)) reject("NoSuchEntity", `no wall '${wallId}'`);
    state.activeWallId = wallId; // switching to the current wall is a no-op success
    return { wallId };
  },

  RegisterContent(state, args, meta) {
    const kindRaw = wantString(args, "kind")!;
    const kinds: ContentKind[] = ["Pdf", "Image", "Video", "WebLink", "ScreenShare"];
    if (!kinds.includes(kindRaw as ContentKind)) {
      reject("InvalidContent", `unknown kind '${kindRaw}'`);
    }
    const kind = kindRaw as ContentKind;
    const source = args.source;
    if (!source || typeof source !== "object" || Array.isArray(source)) {
      reject("InvalidContent", "source must be an object");
    }
    const src = source as Record<string, unknown>;
    const title = wantString(args, "title", true) ?? "";
    let cleanSource: Record<string, string>;
    if (kind === "ScreenShare") {
      const owner = (src.owner ?? meta.actorId) as unknown;
      const label = (src.streamLabel ?? "") as unknown;
      if (typeof owner !== "string" || typeof label !== "string") {
        reject("InvalidContent", "bad screen-share source");
      }
      if (!(owner in state.participants)) {
        reject("NoSuchEntity", `no participant '${owner}'`);
      }
      cleanSource = { owner, streamLabel: label };
    } else {
      const key = kind === "WebLink" ? "url" : "file";
      const value = src[key];
      if (typeof value !== "string" || !value) {
        reject("InvalidContent", `${kind} source needs a non-empty '${key}'`);
      }
      cleanSource = { [key]: value };
    }
    const contentId = alloc(state, "c");
    const content: ContentDoc = {
      id: contentId, kind, source: cleanSource, title,
      uploaderId: meta.actorId,
      viewState: { page: 1, scrollX: 0, scrollY: 0, zoom: 1, playhead: 0 },
      ended: false,
    };
    state.contents = { ...state.contents, [contentId]: content };
    return { contentId };
  },

  SetViewportContent(state, args) {
    const wall = findWall(state, args);
    const viewportId = wantString(args, "viewportId")!;
    const vp = wall.viewports.find((v) => v.id === viewportId);
    if (!vp) reject("NoSuchSlot", `no viewport '${viewportId}'`);
    const contentId = wantString(args, "contentId", true);
    if (contentId === vp.contentId) return { wallId: wall.id }; // idempotent
    const stack = [...wall.hiddenStack];
    if (contentId !== null) {
      if (!(contentId in state.contents)) {
        reject("NoSuchEntity", `no content '${contentId}'`);
      }
      if (wall.viewports.some((v) => v.contentId === contentId)) {
        reject("ContentInUse", `content ${contentId} is already visible`);
      }
      const stackIndex = stack.indexOf(contentId);
      if (stackIndex >= 0) stack.splice(stackIndex, 1);
    }
    if (vp.contentId !== null) stack.unshift(vp.contentId);
    const next: WallDoc = {
      ...wall,
      viewports: wall.viewports.map((v) =>
        v.id === viewportId ? { ...v, contentId } : v),
      hiddenStack: stack,
    };
    const problems = layout.wallViolations(next);
    if (problems.length) reject("InternalGeometryError", problems.join("; "));
    swapWall(state, next);
    return { wallId: wall.id };
  },

  UpdateContentState(state, args) {
    const contentId = wantString(args, "contentId")!;
    const content = state.contents[contentId];
    if (!content) reject("NoSuchEntity", `no content '${contentId}'`);
    const fields = ["page", "scrollX", "scrollY", "zoom", "playhead"]
      .filter((key) => key in args && args[key] !== undefined);
    if (!fields.length) reject("Malformed", "no view-state fields given");
    const next: ViewStateDoc = { ...content.viewState };
    if (fields.includes("page")) {
      const page = wantInt(args, "page")!;
      if (page < 1) reject("InvalidContentState", "page must be >= 1");
      if (page !== 1 && content.kind !== "Pdf") {
        reject("InvalidContentState", `${content.kind} has a single page`);
      }
      next.page = page;
    }
    for (const [key, attr] of [["scrollX", "scrollX"], ["scrollY", "scrollY"]] as const) {
      if (fields.includes(key)) {
        const value = wantNumber(args, key);
        if (value < 0 || value > 1) {
          reject("InvalidContentState", `${key} must be within 0..1`);
        }
        next[attr] = quantize(value);
      }
    }
    if (fields.includes("zoom")) {
      const zoom = wantNumber(args, "zoom");
      if (!(zoom > 0) || zoom > 1e6) reject("InvalidContentState", "zoom must be positive");
      next.zoom = quantize(zoom);
    }
    if (fields.includes("playhead")) {
      const playhead = wantNumber(args, "playhead");
      if (playhead < 0 || playhead > 1e9) {
        reject("InvalidContentState", "playhead must be >= 0 seconds");
      }
      if (playhead !== 0 && content.kind !== "Video") {
        reject("InvalidContentState", `${content.kind} has no playhead`);
      }
      next.playhead = quantize(playhead);
    }
    state.contents = {
      ...state.contents,
      [contentId]: { ...content, viewState: next },
    };
    return { contentId };
  },

  AddNote(state, args, meta) {
    const contentId = wantString(args, "contentId")!;
    if (!(contentId in state.contents)) reject("NoSuchEntity", `no content '${contentId}'`);
    if (!(meta.actorId in state.participants)) {
      reject("NoSuchEntity", `no participant '${meta.actorId}'`);
    }
    const text = wantString(args, "text")!;
    if (!text.trim()) reject("EmptyNote", "note text must be non-empty");
    const noteId = alloc(state, "n");
    state.notes = [...state.notes, {
      id: noteId, authorId: meta.actorId, contentId, text,
      createdAt: meta.serverTime,
    }];
    return { noteId };
  },

  DeleteNote(state, args) {
    const noteId = wantString(args, "noteId")!;
    if (!state.notes.some((n) => n.id === noteId)) {
      reject("NoSuchEntity", `no note '${noteId}'`);
    }
    state.notes = state.notes.filter((n) => n.id !== noteId);
    return { noteId };
  },

  JoinParticipant(state, args, meta) {
    const participantId = wantString(args, "participantId", true) ?? meta.actorId;
    const displayName = wantString(args, "displayName")!;
    if (!displayName.trim()) reject("InvalidName", "displayName labels cursors");
    const role = wantString(args, "role")!;
    if (!["WallDisplay", "Tabletop", "PersonalDevice"].includes(role)) {
      reject("Malformed", `unknown role '${role}'`);
    }
    state.participants = {
      ...state.participants,
      [participantId]: {
        id: participantId, displayName,
        role: role as "WallDisplay" | "Tabletop" | "PersonalDevice",
        connected: true,
      },
    };
    return { participantId };
  },

  LeaveParticipant(state, args, meta) {
    const participantId = wantString(args, "participantId", true) ?? meta.actorId;
    const participant = state.participants[participantId];
    if (!participant) reject("NoSuchEntity", `no participant '${participantId}'`);
    state.participants = {
      ...state.participants,
      [participantId]: { ...participant, connected: false },
    };
    const touched: Record<string, ContentDoc> = {};
    for (const [cid, content] of Object.entries(state.contents)) {
      if (content.kind === "ScreenShare" && !content.ended &&
          content.source.owner === participantId) {
        touched[cid] = { ...content, ended: true };
      }
    }
    if (Object.keys(touched).length) {
      state.contents = { ...state.contents, ...touched };
    }
    return { participantId };
  },
};

export const LAYOUT_VARIANTS = new Set([
  "ApplyPreset", "ApplyCustomLayout", "InsertView", "SwapViews",
  "MaximizeView", "RestoreView", "HideView", "DeleteView",
]);

// ---------------------------------------------------------------------------
// Entry points
// ---------------------------------------------------------------------------

export function applyCommand(
  state: SessionDoc,
  command: CommandDoc,
  meta: CommandMeta,
): { state: SessionDoc; result: Record<string, unknown> } {
  const handler = handlers[command.variant];
  if (!handler) reject("Malformed", `unknown command '${command.variant}'`);
  if (!command.args || typeof command.args !== "object") {
    reject("Malformed", "command args must be an object");
  }
  const next = structuredClone(state);
  let result: Record<string, unknown>;
  try {
    result = handler(next, command.args, meta);
  } catch (error) {
    if (error instanceof LayoutError) {
      throw new CommandRejectedError(error.reason, error.detail);
    }
    throw error;
  }
  next.version = state.version + 1;
  return { state: next, result };
}

/** Replay one journaled event; determinism makes this exact. */
export function applyEvent(state: SessionDoc, event: EventDoc): SessionDoc {
  if (event.seq !== state.version + 1) {
    throw new CommandRejectedError(
      "Malformed", `event seq ${event.seq} does not follow version ${state.version}`);
  }
  const { state: next } = applyCommand(state, event.command, {
    actorId: event.actorId,
    serverTime: event.serverTime,
    requestId: event.requestId,
  });
  return next;
}

/** Full referential-integrity audit; [] means the document is sound. */
export function sessionViolations(state: SessionDoc): string[] {
  const problems: string[] = [];
  if (!state.walls.length) problems.push("session has no walls");
  if (!wallById(state, state.activeWallId)) {
    problems.push(`active wall '${state.activeWallId}' missing`);
  }
  for (const wall of state.walls) {
    problems.push(...layout.wallViolations(wall));
    for (const cid of wallContentIds(wall).keys()) {
      if (!(cid in state.contents)) {
        problems.push(`wall ${wall.id} references unknown content ${cid}`);
      }
    }
  }
  for (const note of state.notes) {
    if (!(note.contentId in state.contents)) {
      problems.push(`note ${note.id} references unknown content ${note.contentId}`);
    }
  }
  return problems;
}

export { activeWall };
