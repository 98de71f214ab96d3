/**
 * The session channel: WebSocket lifecycle, hello/resync, heartbeat pongs,
 * command sending with optimistic tracking, cursor send/receive.
 *
 * The WebSocket constructor is injectable so headless clients (tests, node)
 * can drive the same code path as the browser.
 */

import { canonicalText } from "./canonical.js";
import { CommandDoc, SessionDoc } from "./model.js";
import { CursorUpdate, Envelope, envelope, parseEnvelope, PROTOCOL_VERSION } from "./protocol.js";
import { ClientReplica } from "./replica.js";

export interface WsLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
}

export type WsFactory = (url: string) => WsLike;

export interface ChannelOptions {
  baseUrl: string; // http(s)://host:port
  sessionId: string;
  token: string;
  role: "WallDisplay" | "Tabletop" | "PersonalDevice";
  clientTag: string; // request-id prefix, unique per client instance
  wsFactory?: WsFactory;
  reconnectDelayMs?: number;
}

export interface ChannelEvents {
  onState?: (doc: SessionDoc) => void;
  onCursor?: (cursor: CursorUpdate) => void;
  onPresence?: (participants: unknown[]) => void;
  onReject?: (requestId: string | null, reason: string, detail: string) => void;
  onConnection?: (connected: boolean) => void;
}

export class SessionChannel {
  readonly replica = new ClientReplica();
  connected = false;
  private ws: WsLike | null = null;
  private requestCounter = 0;
  private closedByUser = false;
  private reconnectTimer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private options: ChannelOptions,
    public events: ChannelEvents = {},
  ) {}

  private wsUrl(): string {
    const base = this.options.baseUrl.replace(/^http/, "ws");
    return `${base}/api/sessions/${this.options.sessionId}/channel` +
      `?token=${encodeURIComponent(this.options.token)}`;
  }

  connect(): void {
    this.closedByUser = false;
    const factory = this.options.wsFactory ??
      ((url: string) => new WebSocket(url) as unknown as WsLike);
    const ws = factory(this.wsUrl());
    this.ws = ws;
    ws.onopen = () => {
      const payload: Record<string, unknown> = {
        token: this.options.token,
        role: this.options.role,
        protoVersion: PROTOCOL_VERSION,
      };
      if (this.replica.lastAckedSeq > 0) {
        payload.lastAckedSeq = this.replica.lastAckedSeq; // resume, not refetch
      }
      ws.send(canonicalText(envelope("Hello", this.options.sessionId, { payload })));
    };
    ws.onmessage = (ev) => {
      if (typeof ev.data === "string") this.handleFrame(ev.data);
    };
    ws.onclose = () => this.handleClosed();
    ws.onerror = () => { /* onclose follows */ };
  }

  close(): void {
    this.closedByUser = true;
    if (this.reconnectTimer) clearTimeout(this.reconnectTimer);
    this.ws?.close();
    this.ws = null;
  }

  private handleClosed(): void {
    const wasConnected = this.connected;
    this.connected = false;
    if (wasConnected) this.events.onConnection?.(false);
    if (!this.closedByUser) {
      const delay = this.options.reconnectDelayMs ?? 1000;
      this.reconnectTimer = setTimeout(() => this.connect(), delay);
    }
  }

  private handleFrame(text: string): void {
    const env = parseEnvelope(text);
    if (!env) return;
    switch (env.type) {
      case "Welcome": {
        this.replica.participantId =
          (env.payload.participantId as string) ?? null;
        this.connected = true;
        this.events.onConnection?.(true);
        break;
      }
      case "Snapshot": {
        this.replica.applySnapshot(
          env.payload.state as SessionDoc, env.payload.version as number);
        this.emitState();
        break;
      }
      case "Event": {
        if (this.replica.applyEventEnvelope(env)) {
          this.emitState();
        } else if (this.replica.gapDetected) {
          // missed something: force a clean resync over a fresh socket
          this.ws?.close();
        }
        break;
      }
      case "Reject": {
        const requestId = env.requestId;
        if (requestId) this.replica.settle(requestId);
        this.events.onReject?.(
          requestId,
          String(env.payload.reason ?? "?"),
          String(env.payload.detail ?? ""));
        this.emitState();
        break;
      }
      case "Cursor": {
        this.events.onCursor?.(env.payload as unknown as CursorUpdate);
        break;
      }
      case "Presence": {
        this.events.onPresence?.(
          (env.payload.participants as unknown[]) ?? []);
        break;
      }
      case "Ping": {
        this.sendRaw(envelope("Pong", this.options.sessionId,
                              { payload: env.payload }));
        break;
      }
      default:
        break;
    }
  }

  private emitState(): void {
    const doc = this.replica.view();
    if (doc) this.events.onState?.(doc);
  }

  private sendRaw(env: Envelope): void {
    this.ws?.send(canonicalText(env));
  }

  /** Queue a command; the replica shows it optimistically until settled. */
  sendCommand(variant: string, args: Record<string, unknown>): string {
    this.requestCounter += 1;
    const requestId = `${this.options.clientTag}-r${this.requestCounter}`;
    const command: CommandDoc = { variant, args };
    this.replica.trackPending(requestId, command);
    this.sendRaw(envelope("Command", this.options.sessionId, {
      senderId: this.replica.participantId,
      requestId,
      payload: command as unknown as Record<string, unknown>,
    }));
    this.emitState();
    return requestId;
  }

  sendCursor(x: number, y: number,
             action: "Move" | "Down" | "Up" | "Click", wallId: string): void {
    this.sendRaw(envelope("Cursor", this.options.sessionId, {
      senderId: this.replica.participantId,
      payload: { x, y, action, wallId },
    }));
  }
}
