/** Wire envelope helpers; schema v1 (see docs/protocol.md in the repo root). */

export const PROTOCOL_VERSION = 1;

export type EnvelopeType =
  | "Hello" | "Welcome" | "Snapshot" | "Command" | "Event"
  | "Reject" | "Cursor" | "Presence" | "Ping" | "Pong";

export interface Envelope {
  type: EnvelopeType;
  sessionId: string;
  senderId: string | null;
  requestId: string | null;
  seq: number | null;
  payload: Record<string, unknown>;
}

export function envelope(
  type: EnvelopeType,
  sessionId: string,
  extra: Partial<Pick<Envelope, "senderId" | "requestId" | "seq" | "payload">> = {},
): Envelope {
  return {
    type,
    sessionId,
    senderId: extra.senderId ?? null,
    requestId: extra.requestId ?? null,
    seq: extra.seq ?? null,
    payload: extra.payload ?? {},
  };
}

export interface CursorUpdate {
  ownerId: string;
  label: string;
  x: number;
  y: number;
  action: "Move" | "Down" | "Up" | "Click";
  wallId: string;
}

export function parseEnvelope(text: string): Envelope | null {
  try {
    const data = JSON.parse(text);
    if (data && typeof data === "object" && typeof data.type === "string") {
      return data as Envelope;
    }
  } catch {
    // fall through
  }
  return null;
}
