/**
 * Layout wizards: the preset picker and the step-by-step custom builder.
 *
 * Both are pure state machines that end in exactly one command; the DOM
 * layer renders their previews and surfaces rejection feedback inline.
 */

import {
  CandidateDoc,
  enumerateInsertCandidates,
  LayoutError,
  presetCatalog,
  PresetLayoutDoc,
  validateLayout,
  Violation,
} from "./layout.js";
import { CommandDoc, GridRect, WallDoc } from "./model.js";

export class PresetWizard {
  constructor(private wall: WallDoc) {}

  counts(): number[] {
    return [1, 2, 3, 4, 5, 6, 7, 8, 9];
  }

  variants(viewCount: number): PresetLayoutDoc[] {
    return presetCatalog(viewCount, this.wall.gridCols, this.wall.gridRows);
  }

  command(viewCount: number, variantIndex: number): CommandDoc {
    this.variants(viewCount); // throws UnsupportedPresetCount early
    return {
      variant: "ApplyPreset",
      args: { wallId: this.wall.id, viewCount, variantIndex },
    };
  }
}

export interface BuilderStep {
  ok: boolean;
  violations: Violation[];
}

export class CustomLayoutBuilder {
  rects: GridRect[] = [];

  constructor(public gridCols: number, public gridRows: number,
              private wallId: string) {}

  /** Try to add the next rectangle; the preview state only grows when valid. */
  tryAdd(rect: GridRect): BuilderStep {
    const violations = validateLayout(this.gridCols, this.gridRows,
                                      [...this.rects, rect]);
    if (violations.length) return { ok: false, violations };
    this.rects.push(rect);
    return { ok: true, violations: [] };
  }

  removeLast(): void {
    this.rects.pop();
  }

  reset(): void {
    this.rects = [];
  }

  command(): CommandDoc | null {
    if (!this.rects.length) return null;
    return {
      variant: "ApplyCustomLayout",
      args: { wallId: this.wallId, rects: this.rects.map((r) => ({ ...r })) },
    };
  }
}

export class InsertPicker {
  candidates: CandidateDoc[] = [];
  error: string | null = null;

  constructor(private wall: WallDoc) {
    try {
      this.candidates = enumerateInsertCandidates(wall);
    } catch (err) {
      this.error = err instanceof LayoutError ? err.reason : String(err);
    }
  }

  command(index: number, contentId: string | null = null): CommandDoc {
    const candidate = this.candidates[index];
    if (!candidate) throw new Error(`no candidate #${index}`);
    const args: Record<string, unknown> = {
      wallId: this.wall.id,
      candidate,
    };
    if (contentId) args.contentId = contentId;
    return { variant: "InsertView", args };
  }
}
