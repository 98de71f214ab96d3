/**
 * The client-side replica: last snapshot plus applied events, with optimistic
 * local application of in-flight commands.
 *
 * The UI never invents state. Every mutation goes out as a Command; the
 * display state is the confirmed replica with pending commands applied on
 * top, and it snaps back the moment the server echoes an Event or a Reject
 * settles a request. Confirmed state only ever advances by gapless seq.
 */

import { CommandDoc, EventDoc, SessionDoc } from "./model.js";
import { Envelope } from "./protocol.js";
import { applyCommand, applyEvent, CommandRejectedError } from "./reducer.js";

interface PendingCommand {
  requestId: string;
  command: CommandDoc;
}

export class ClientReplica {
  confirmed: SessionDoc | null = null;
  lastAckedSeq = 0;
  pending: PendingCommand[] = [];
  participantId: string | null = null;
  gapDetected = false;
  private optimisticCache: SessionDoc | null = null;

  applySnapshot(state: SessionDoc, version: number): void {
    this.confirmed = state;
    this.lastAckedSeq = version;
    this.gapDetected = false;
    this.optimisticCache = null;
  }

  /** Returns true when the event advanced the confirmed state. */
  applyEventEnvelope(env: Envelope): boolean {
    if (this.confirmed === null || typeof env.seq !== "number") return false;
    if (env.seq <= this.lastAckedSeq) return false; // duplicate during resync
    if (env.seq !== this.lastAckedSeq + 1) {
      this.gapDetected = true; // caller must resync
      return false;
    }
    const payload = env.payload as {
      serverTime: number;
      command: CommandDoc;
      result: Record<string, unknown>;
    };
    const event: EventDoc = {
      seq: env.seq,
      actorId: env.senderId ?? "",
      serverTime: payload.serverTime,
      requestId: env.requestId,
      command: payload.command,
      result: payload.result ?? {},
    };
    this.confirmed = applyEvent(this.confirmed, event);
    this.lastAckedSeq = env.seq;
    if (env.requestId) {
      this.settle(env.requestId);
    }
    this.optimisticCache = null;
    return true;
  }

  trackPending(requestId: string, command: CommandDoc): void {
    this.pending.push({ requestId, command });
    this.optimisticCache = null;
  }

  settle(requestId: string): void {
    const before = this.pending.length;
    this.pending = this.pending.filter((p) => p.requestId !== requestId);
    if (this.pending.length !== before) this.optimisticCache = null;
  }

  /** Confirmed state with in-flight commands applied where they still fit. */
  view(): SessionDoc | null {
    if (this.confirmed === null) return null;
    if (!this.pending.length) return this.confirmed;
    if (this.optimisticCache) return this.optimisticCache;
    let state = this.confirmed;
    for (const { command } of this.pending) {
      try {
        state = applyCommand(state, command, {
          actorId: this.participantId ?? "",
          serverTime: 0,
          requestId: null,
        }).state;
      } catch (error) {
        if (!(error instanceof CommandRejectedError)) throw error;
        // the server will reject it too; display the rest without it
      }
    }
    this.optimisticCache = state;
    return state;
  }
}
