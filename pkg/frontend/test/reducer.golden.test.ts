// Replica equivalence: replay the golden event logs exported from the server
// suite and land on byte-identical canonical states.

import { readdirSync, readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { canonicalText, stateHash } from "../src/canonical.js";
import { EventDoc, SessionDoc } from "../src/model.js";
import { applyEvent, sessionViolations } from "../src/reducer.js";

const GOLDEN_DIR = join(__dirname, "..", "golden");

interface GoldenLog {
  name: string;
  genesis: SessionDoc;
  events: EventDoc[];
  finalCanonical: string;
  finalStateHash: string;
}

const files = readdirSync(GOLDEN_DIR).filter((f) => f.endsWith(".json")).sort();

describe("golden event logs", () => {
  it("has the full committed set", () => {
    expect(files).toEqual([
      "churny.json", "content-heavy.json", "duplicates.json",
      "layout-mix.json", "tour.json",
    ]);
  });

  for (const file of files) {
    it(`replays ${file} to the recorded canonical state`, async () => {
      const log: GoldenLog = JSON.parse(
        readFileSync(join(GOLDEN_DIR, file), "utf-8"));
      let state = log.genesis;
      for (const event of log.events) {
        state = applyEvent(state, event);
        expect(sessionViolations(state)).toEqual([]);
      }
      expect(state.version).toBe(log.events.length ? log.events.at(-1)!.seq : 0);
      expect(canonicalText(state)).toBe(log.finalCanonical);
      expect(await stateHash(state)).toBe(log.finalStateHash);
    });
  }
});
