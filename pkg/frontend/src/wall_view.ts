/**
 * Wall mode: the full-surface renderer for the shared display.
 *
 * Viewports are positioned grid-proportionally, the hidden stack sits top
 * center, the quick access toolbar bottom center, and the manipulation layer
 * overlays a tapped view with broad action targets (swap, hide, maximize,
 * note) so touch interaction needs no precision. A maximized view covers the
 * whole surface. Labeled remote cursors render in an overlay layer.
 */

import { SessionChannel } from "./connection.js";
import { CursorOverlayModel } from "./cursors.js";
import { activeWall, ContentDoc, SessionDoc, ViewportDoc, WallDoc } from "./model.js";
import { notesForContent } from "./notes.js";
import { ScreenShareManager } from "./screenshare.js";
import { CursorUpdate } from "./protocol.js";
import { InsertPicker, PresetWizard } from "./wizard.js";

const KIND_GLYPHS: Record<string, string> = {
  Pdf: "▤", Image: "▦", Video: "▶", WebLink: "⌘", ScreenShare: "⎙",
};

export class WallView {
  root: HTMLElement;
  private surface: HTMLElement;
  private stackBar: HTMLElement;
  private toolbar: HTMLElement;
  private cursorLayer: HTMLElement;
  private banner: HTMLElement;
  private overlayFor: string | null = null; // viewport id with the action layer
  private swapArmed: string | null = null; // first slot of a pending swap
  private doc: SessionDoc | null = null;
  readonly cursors = new CursorOverlayModel();

  constructor(
    container: HTMLElement,
    private channel: SessionChannel,
    private baseUrl: string,
    private token: string,
    private shares: ScreenShareManager | null = null,
  ) {
    container.innerHTML = "";
    this.root = el("div", "wall-root");
    this.surface = el("div", "wall-surface");
    this.stackBar = el("div", "hidden-stack");
    this.toolbar = el("div", "quick-toolbar");
    this.cursorLayer = el("div", "cursor-layer");
    this.banner = el("div", "reconnect-banner");
    this.banner.textContent = "connection lost — resyncing…";
    this.banner.style.display = "none";
    this.root.append(this.surface, this.stackBar, this.toolbar,
                     this.cursorLayer, this.banner);
    container.append(this.root);
  }

  setConnected(connected: boolean): void {
    this.banner.style.display = connected ? "none" : "block";
  }

  onCursor(update: CursorUpdate): void {
    this.cursors.observe(update);
    this.renderCursors();
  }

  render(doc: SessionDoc): void {
    this.doc = doc;
    const wall = activeWall(doc);
    this.renderSurface(doc, wall);
    this.renderStack(doc, wall);
    this.renderToolbar(doc, wall);
    this.renderCursors();
  }

  // -- surface ---------------------------------------------------------------

  private renderSurface(doc: SessionDoc, wall: WallDoc): void {
    this.surface.innerHTML = "";
    const maximized = wall.maximizedViewportId;
    for (const vp of wall.viewports) {
      if (maximized && vp.id !== maximized) continue;
      const tile = el("div", "viewport");
      if (maximized) {
        tile.classList.add("maximized");
        Object.assign(tile.style, { left: "0%", top: "0%", width: "100%", height: "100%" });
      } else {
        Object.assign(tile.style, {
          left: `${(vp.rect.col / wall.gridCols) * 100}%`,
          top: `${(vp.rect.row / wall.gridRows) * 100}%`,
          width: `${(vp.rect.colSpan / wall.gridCols) * 100}%`,
          height: `${(vp.rect.rowSpan / wall.gridRows) * 100}%`,
        });
      }
      tile.dataset.viewportId = vp.id;
      tile.append(this.renderContent(doc, vp));
      tile.addEventListener("click", (ev) => {
        ev.stopPropagation();
        this.toggleOverlay(vp.id);
      });
      if (this.overlayFor === vp.id) {
        tile.append(this.manipulationLayer(doc, wall, vp));
      }
      this.surface.append(tile);
    }
  }

  private renderContent(doc: SessionDoc, vp: ViewportDoc): HTMLElement {
    const body = el("div", "viewport-body");
    if (!vp.contentId) {
      body.classList.add("empty");
      body.textContent = "empty";
      return body;
    }
    const content = doc.contents[vp.contentId];
    if (!content) return body;
    body.append(this.contentElement(content));
    const caption = el("div", "viewport-caption");
    caption.textContent =
      `${KIND_GLYPHS[content.kind] ?? ""} ${content.title || content.id}`;
    body.append(caption);
    return body;
  }

  private contentElement(content: ContentDoc): HTMLElement {
    const fileUrl = (hash: string) =>
      `${this.baseUrl}/api/files/${hash}?token=${encodeURIComponent(this.token)}`;
    switch (content.kind) {
      case "Image": {
        const img = document.createElement("img");
        img.src = fileUrl(content.source.file);
        const { zoom, scrollX, scrollY } = content.viewState;
        img.style.transform =
          `scale(${zoom}) translate(${-scrollX * 100}%, ${-scrollY * 100}%)`;
        return img;
      }
      case "Pdf": {
        const frame = document.createElement("iframe");
        frame.src = `${fileUrl(content.source.file)}#page=${content.viewState.page}`;
        return frame;
      }
      case "Video": {
        const video = document.createElement("video");
        video.src = fileUrl(content.source.file);
        video.controls = true;
        video.currentTime = content.viewState.playhead;
        return video;
      }
      case "WebLink": {
        const frame = document.createElement("iframe");
        frame.src = content.source.url;
        frame.sandbox.add("allow-scripts", "allow-same-origin");
        return frame;
      }
      case "ScreenShare": {
        const stream = this.shares?.streamFor(content.id) ?? null;
        if (content.ended || (!stream && this.shares)) {
          const placeholder = el("div", "share-placeholder");
          placeholder.textContent = content.ended
            ? `${content.title || "share"} — ended`
            : `${content.title || "share"} — live on ${content.source.owner}`;
          return placeholder;
        }
        const video = document.createElement("video");
        video.autoplay = true;
        video.muted = true;
        if (stream) video.srcObject = stream;
        return video;
      }
    }
  }

  // -- manipulation layer -----------------------------------------------------

  private toggleOverlay(viewportId: string): void {
    if (this.swapArmed && this.doc) {
      // second tap completes an armed swap
      const wall = activeWall(this.doc);
      this.channel.sendCommand("SwapViews", {
        wallId: wall.id,
        slotA: { viewportId: this.swapArmed },
        slotB: { viewportId },
      });
      this.swapArmed = null;
      this.overlayFor = null;
    } else {
      this.overlayFor = this.overlayFor === viewportId ? null : viewportId;
    }
    if (this.doc) this.render(this.doc);
  }

  private manipulationLayer(doc: SessionDoc, wall: WallDoc,
                            vp: ViewportDoc): HTMLElement {
    const layer = el("div", "manipulation-layer");
    const actions: [string, () => void][] = [
      ["swap", () => { this.swapArmed = vp.id; this.overlayFor = null; }],
      ["hide", () => this.channel.sendCommand("HideView",
          { wallId: wall.id, viewportId: vp.id })],
      [wall.maximizedViewportId === vp.id ? "restore" : "maximize", () => {
        if (wall.maximizedViewportId === vp.id) {
          this.channel.sendCommand("RestoreView", { wallId: wall.id });
        } else {
          this.channel.sendCommand("MaximizeView",
                                   { wallId: wall.id, viewportId: vp.id });
        }
      }],
      ["delete", () => this.channel.sendCommand("DeleteView",
          { wallId: wall.id, viewportId: vp.id })],
      ["note", () => {
        const text = window.prompt("note") ?? "";
        if (text.trim() && vp.contentId) {
          this.channel.sendCommand("AddNote",
                                   { contentId: vp.contentId, text });
        }
      }],
    ];
    for (const [label, run] of actions) {
      const region = el("button", "broad-target");
      region.textContent = label;
      region.addEventListener("click", (ev) => {
        ev.stopPropagation();
        this.overlayFor = null;
        run();
        if (this.doc) this.render(this.doc);
      });
      layer.append(region);
    }
    if (vp.contentId) {
      const count = notesForContent(doc, vp.contentId).length;
      if (count) {
        const badge = el("div", "note-badge");
        badge.textContent = `${count} note${count > 1 ? "s" : ""}`;
        layer.append(badge);
      }
    }
    return layer;
  }

  // -- hidden stack and toolbar -------------------------------------------------

  private renderStack(doc: SessionDoc, wall: WallDoc): void {
    this.stackBar.innerHTML = "";
    wall.hiddenStack.forEach((contentId, index) => {
      const content = doc.contents[contentId];
      const chip = el("button", "stack-chip");
      chip.textContent =
        `${KIND_GLYPHS[content?.kind ?? ""] ?? "▢"} ${content?.title || contentId}`;
      chip.title = "swap into a view";
      chip.addEventListener("click", () => {
        if (this.swapArmed) {
          this.channel.sendCommand("SwapViews", {
            wallId: wall.id,
            slotA: { viewportId: this.swapArmed },
            slotB: { stackIndex: index },
          });
          this.swapArmed = null;
        } else if (this.overlayFor) {
          this.channel.sendCommand("SwapViews", {
            wallId: wall.id,
            slotA: { viewportId: this.overlayFor },
            slotB: { stackIndex: index },
          });
          this.overlayFor = null;
        }
      });
      this.stackBar.append(chip);
    });
  }

  private renderToolbar(doc: SessionDoc, wall: WallDoc): void {
    this.toolbar.innerHTML = "";
    const presets = el("span", "toolbar-group");
    const wizard = new PresetWizard(wall);
    for (const count of [2, 3, 4, 5, 6, 9]) {
      const button = el("button", "toolbar-button");
      button.textContent = `${count}▦`;
      button.addEventListener("click", () => {
        const { variant, args } = wizard.command(count, 0);
        this.channel.sendCommand(variant, args);
      });
      presets.append(button);
    }
    const insert = el("button", "toolbar-button");
    insert.textContent = "+view";
    insert.addEventListener("click", () => {
      const picker = new InsertPicker(wall);
      if (picker.candidates.length) {
        const { variant, args } = picker.command(0);
        this.channel.sendCommand(variant, args);
      }
    });
    const walls = el("span", "toolbar-group");
    for (const w of doc.walls) {
      const thumb = el("button", "wall-thumb");
      thumb.textContent = w.id === doc.activeWallId ? `● ${w.name}` : w.name;
      thumb.addEventListener("click", () =>
        this.channel.sendCommand("SwitchActiveWall", { wallId: w.id }));
      walls.append(thumb);
    }
    this.toolbar.append(presets, insert, walls);
  }

  // -- cursors -------------------------------------------------------------------

  private renderCursors(): void {
    this.cursorLayer.innerHTML = "";
    const now = Date.now();
    for (const cursor of this.cursors.visible()) {
      const dot = el("div", "remote-cursor");
      dot.style.left = `${cursor.x * 100}%`;
      dot.style.top = `${cursor.y * 100}%`;
      if (cursor.pulseUntil > now) dot.classList.add("pulse");
      const tag = el("span", "cursor-label");
      tag.textContent = cursor.label;
      dot.append(tag);
      this.cursorLayer.append(dot);
    }
  }
}

function el(tag: string, className: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  return node;
}
