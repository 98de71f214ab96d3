/**
 * Cursor plumbing: outbound normalization/throttling from pointer events,
 * and the inbound overlay model of everyone else's labeled cursors.
 */

import { CursorUpdate } from "./protocol.js";

export interface OverlayCursor {
  ownerId: string;
  label: string;
  x: number;
  y: number;
  lastAction: string;
  pulseUntil: number; // ms timestamp; render a click pulse until then
  updatedAt: number;
}

export class CursorOverlayModel {
  cursors = new Map<string, OverlayCursor>();
  staleAfterMs = 15_000;
  pulseMs = 450;

  constructor(private now: () => number = () => Date.now()) {}

  observe(update: CursorUpdate): OverlayCursor {
    const at = this.now();
    const pulses = update.action === "Click" || update.action === "Down";
    const existing = this.cursors.get(update.ownerId);
    const cursor: OverlayCursor = {
      ownerId: update.ownerId,
      label: update.label,
      x: update.x,
      y: update.y,
      lastAction: update.action,
      pulseUntil: pulses ? at + this.pulseMs : existing?.pulseUntil ?? 0,
      updatedAt: at,
    };
    this.cursors.set(update.ownerId, cursor);
    return cursor;
  }

  /** Cursors worth drawing, dropping ones whose owner went quiet. */
  visible(): OverlayCursor[] {
    const at = this.now();
    for (const [ownerId, cursor] of this.cursors) {
      if (at - cursor.updatedAt > this.staleAfterMs) this.cursors.delete(ownerId);
    }
    return [...this.cursors.values()];
  }
}

/**
 * Outbound side: clamp pointer coordinates into wall space and keep the
 * send rate friendly (the server coalesces further; local throttling just
 * avoids flooding the socket). Actions always go out immediately.
 */
export class CursorSender {
  private lastMoveAt = -Infinity;
  private pendingMove: { x: number; y: number } | null = null;

  constructor(
    private send: (x: number, y: number, action: "Move" | "Down" | "Up" | "Click") => void,
    private minIntervalMs = 1000 / 40,
    private now: () => number = () => performance.now(),
  ) {}

  static normalize(
    clientX: number, clientY: number,
    rect: { left: number; top: number; width: number; height: number },
  ): { x: number; y: number } | null {
    if (rect.width <= 0 || rect.height <= 0) return null;
    const x = (clientX - rect.left) / rect.width;
    const y = (clientY - rect.top) / rect.height;
    if (x < 0 || x > 1 || y < 0 || y > 1) return null;
    return { x: Math.round(x * 1e6) / 1e6, y: Math.round(y * 1e6) / 1e6 };
  }

  move(x: number, y: number): void {
    const at = this.now();
    if (at - this.lastMoveAt >= this.minIntervalMs) {
      this.lastMoveAt = at;
      this.pendingMove = null;
      this.send(x, y, "Move");
    } else {
      this.pendingMove = { x, y }; // last writer wins
    }
  }

  action(x: number, y: number, action: "Down" | "Up" | "Click"): void {
    this.pendingMove = null; // the action carries the newest position
    this.send(x, y, action);
  }

  /** Call on an interval (or rAF) to release a trailing move. */
  flush(): void {
    if (this.pendingMove && this.now() - this.lastMoveAt >= this.minIntervalMs) {
      const { x, y } = this.pendingMove;
      this.pendingMove = null;
      this.lastMoveAt = this.now();
      this.send(x, y, "Move");
    }
  }
}
