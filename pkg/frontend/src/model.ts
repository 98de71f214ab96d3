/** Session document shapes, exactly as they appear in canonical form. */

export interface GridRect {
  col: number;
  row: number;
  colSpan: number;
  rowSpan: number;
}

export interface ViewportDoc {
  id: string;
  rect: GridRect;
  contentId: string | null;
}

export interface WallDoc {
  id: string;
  name: string;
  gridCols: number;
  gridRows: number;
  viewports: ViewportDoc[];
  hiddenStack: string[];
  maximizedViewportId: string | null;
}

export type ContentKind = "Pdf" | "Image" | "Video" | "WebLink" | "ScreenShare";

export interface ViewStateDoc {
  page: number;
  scrollX: number;
  scrollY: number;
  zoom: number;
  playhead: number;
}

export interface ContentDoc {
  id: string;
  kind: ContentKind;
  source: Record<string, string>;
  title: string;
  uploaderId: string;
  viewState: ViewStateDoc;
  ended: boolean;
}

export interface NoteDoc {
  id: string;
  authorId: string;
  contentId: string;
  text: string;
  createdAt: number;
}

export type Role = "WallDisplay" | "Tabletop" | "PersonalDevice";

export interface ParticipantDoc {
  id: string;
  displayName: string;
  role: Role;
  connected: boolean;
}

export interface SessionDoc {
  id: string;
  name: string;
  version: number;
  activeWallId: string;
  defaultGridCols: number;
  defaultGridRows: number;
  idCounter: number;
  walls: WallDoc[];
  contents: Record<string, ContentDoc>;
  notes: NoteDoc[];
  participants: Record<string, ParticipantDoc>;
}

export interface CommandDoc {
  variant: string;
  args: Record<string, unknown>;
}

export interface EventDoc {
  seq: number;
  actorId: string;
  serverTime: number;
  requestId: string | null;
  command: CommandDoc;
  result: Record<string, unknown>;
}

export function wallById(doc: SessionDoc, wallId: string): WallDoc | undefined {
  return doc.walls.find((w) => w.id === wallId);
}

export function activeWall(doc: SessionDoc): WallDoc {
  const wall = wallById(doc, doc.activeWallId);
  if (!wall) throw new Error("invariant: active wall always exists");
  return wall;
}

export function viewportById(wall: WallDoc, viewportId: string): ViewportDoc | undefined {
  return wall.viewports.find((vp) => vp.id === viewportId);
}

/** Every content on a wall (visible plus hidden), with multiplicities. */
export function wallContentIds(wall: WallDoc): Map<string, number> {
  const counts = new Map<string, number>();
  for (const vp of wall.viewports) {
    if (vp.contentId) counts.set(vp.contentId, (counts.get(vp.contentId) ?? 0) + 1);
  }
  for (const cid of wall.hiddenStack) {
    counts.set(cid, (counts.get(cid) ?? 0) + 1);
  }
  return counts;
}
