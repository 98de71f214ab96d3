import { describe, expect, it } from "vitest";

import { SessionDoc } from "../src/model.js";
import { envelope } from "../src/protocol.js";
import { ClientReplica } from "../src/replica.js";

function genesis(): SessionDoc {
  return {
    id: "s-1", name: "test", version: 0, activeWallId: "w1",
    defaultGridCols: 12, defaultGridRows: 12, idCounter: 1,
    walls: [{ id: "w1", name: "Wall 1", gridCols: 12, gridRows: 12,
              viewports: [], hiddenStack: [], maximizedViewportId: null }],
    contents: {}, notes: [],
    participants: {
      "p-me": { id: "p-me", displayName: "me", role: "PersonalDevice",
                connected: true },
    },
  };
}

function eventEnvelope(seq: number, variant: string,
                       args: Record<string, unknown>,
                       requestId: string | null = null) {
  return envelope("Event", "s-1", {
    senderId: "p-me", requestId, seq,
    payload: { serverTime: 1000 + seq, command: { variant, args }, result: {} },
  });
}

describe("ClientReplica", () => {
  it("applies snapshot then gapless events", () => {
    const replica = new ClientReplica();
    replica.applySnapshot(genesis(), 0);
    expect(replica.applyEventEnvelope(
      eventEnvelope(1, "CreateWall", { name: "B" }))).toBe(true);
    expect(replica.lastAckedSeq).toBe(1);
    expect(replica.view()!.walls).toHaveLength(2);
  });

  it("ignores duplicates and flags gaps", () => {
    const replica = new ClientReplica();
    replica.applySnapshot(genesis(), 0);
    const first = eventEnvelope(1, "CreateWall", { name: "B" });
    replica.applyEventEnvelope(first);
    expect(replica.applyEventEnvelope(first)).toBe(false); // duplicate
    expect(replica.gapDetected).toBe(false);
    expect(replica.applyEventEnvelope(
      eventEnvelope(5, "CreateWall", { name: "C" }))).toBe(false);
    expect(replica.gapDetected).toBe(true); // must resync
  });

  it("shows optimistic state until the echo settles it", () => {
    const replica = new ClientReplica();
    replica.participantId = "p-me";
    replica.applySnapshot(genesis(), 0);
    replica.trackPending("r1", {
      variant: "ApplyPreset", args: { viewCount: 4, variantIndex: 0 },
    });
    expect(replica.view()!.walls[0].viewports).toHaveLength(4); // optimistic
    expect(replica.confirmed!.walls[0].viewports).toHaveLength(0);

    replica.applyEventEnvelope(eventEnvelope(
      1, "ApplyPreset", { viewCount: 4, variantIndex: 0 }, "r1"));
    expect(replica.pending).toHaveLength(0); // settled by echo
    expect(replica.view()!.walls[0].viewports).toHaveLength(4);
    expect(replica.view()).toBe(replica.confirmed);
  });

  it("rolls optimistic state back when the server rejects", () => {
    const replica = new ClientReplica();
    replica.participantId = "p-me";
    replica.applySnapshot(genesis(), 0);
    replica.trackPending("r1", {
      variant: "ApplyPreset", args: { viewCount: 4, variantIndex: 0 },
    });
    expect(replica.view()!.walls[0].viewports).toHaveLength(4);
    replica.settle("r1"); // Reject arrived
    expect(replica.view()!.walls[0].viewports).toHaveLength(0);
  });

  it("keeps rendering when an optimistic command no longer applies", () => {
    const replica = new ClientReplica();
    replica.participantId = "p-me";
    replica.applySnapshot(genesis(), 0);
    // pending hide of a viewport that a concurrent event already deleted
    replica.trackPending("r9", {
      variant: "HideView", args: { viewportId: "v404" },
    });
    expect(replica.view()!.version).toBe(0); // unappliable pending is skipped
  });
});
