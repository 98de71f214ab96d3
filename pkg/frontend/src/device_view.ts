/**
 * Device mode: the personal controller.
 *
 * Shows wall thumbnails for orientation, a focused single view that gets the
 * whole pixel budget, shared navigation controls (page/zoom/scroll), the note
 * panel, upload/share actions, and a trackpad strip that drives a labeled
 * cursor on the wall.
 */

import { SessionChannel } from "./connection.js";
import { CursorSender } from "./cursors.js";
import { activeWall, ContentDoc, SessionDoc, WallDoc } from "./model.js";
import { addNoteCommand, authorName, notesForContent } from "./notes.js";
import { ScreenShareManager } from "./screenshare.js";
import { CustomLayoutBuilder, InsertPicker, PresetWizard } from "./wizard.js";

export class DeviceView {
  root: HTMLElement;
  private thumbs: HTMLElement;
  private focus: HTMLElement;
  private sidebar: HTMLElement;
  private trackpad: HTMLElement;
  private doc: SessionDoc | null = null;
  private focusedViewportId: string | null = null;
  readonly cursorSender: CursorSender;

  constructor(
    container: HTMLElement,
    private channel: SessionChannel,
    private baseUrl: string,
    private token: string,
    private shares: ScreenShareManager,
  ) {
    container.innerHTML = "";
    this.root = el("div", "device-root");
    this.thumbs = el("div", "wall-thumbs");
    this.focus = el("div", "focus-view");
    this.sidebar = el("div", "device-sidebar");
    this.trackpad = el("div", "trackpad");
    this.trackpad.textContent = "trackpad — drives your cursor on the wall";
    this.root.append(this.thumbs, this.focus, this.sidebar, this.trackpad);
    container.append(this.root);

    this.cursorSender = new CursorSender((x, y, action) => {
      const doc = this.doc;
      if (doc) this.channel.sendCursor(x, y, action, doc.activeWallId);
    });
    this.wireTrackpad();
    setInterval(() => this.cursorSender.flush(), 50);
  }

  private wireTrackpad(): void {
    const rect = () => this.trackpad.getBoundingClientRect();
    this.trackpad.addEventListener("pointermove", (ev) => {
      const pos = CursorSender.normalize(ev.clientX, ev.clientY, rect());
      if (pos) this.cursorSender.move(pos.x, pos.y);
    });
    this.trackpad.addEventListener("pointerdown", (ev) => {
      const pos = CursorSender.normalize(ev.clientX, ev.clientY, rect());
      if (pos) this.cursorSender.action(pos.x, pos.y, "Down");
    });
    this.trackpad.addEventListener("pointerup", (ev) => {
      const pos = CursorSender.normalize(ev.clientX, ev.clientY, rect());
      if (pos) {
        this.cursorSender.action(pos.x, pos.y, "Up");
        this.cursorSender.action(pos.x, pos.y, "Click");
      }
    });
  }

  render(doc: SessionDoc): void {
    this.doc = doc;
    this.renderThumbs(doc);
    this.renderFocus(doc);
    this.renderSidebar(doc);
  }

  // -- wall thumbnails ----------------------------------------------------------

  private renderThumbs(doc: SessionDoc): void {
    this.thumbs.innerHTML = "";
    for (const wall of doc.walls) {
      const thumb = el("div", "wall-thumb-mini");
      if (wall.id === doc.activeWallId) thumb.classList.add("active");
      for (const vp of wall.viewports) {
        const cell = el("div", "thumb-cell");
        Object.assign(cell.style, {
          left: `${(vp.rect.col / wall.gridCols) * 100}%`,
          top: `${(vp.rect.row / wall.gridRows) * 100}%`,
          width: `${(vp.rect.colSpan / wall.gridCols) * 100}%`,
          height: `${(vp.rect.rowSpan / wall.gridRows) * 100}%`,
        });
        if (vp.id === this.focusedViewportId) cell.classList.add("focused");
        cell.addEventListener("click", (ev) => {
          ev.stopPropagation();
          this.focusedViewportId = vp.id;
          if (this.doc) this.render(this.doc);
        });
        thumb.append(cell);
      }
      const label = el("div", "thumb-label");
      label.textContent = wall.name;
      thumb.append(label);
      thumb.addEventListener("click", () =>
        this.channel.sendCommand("SwitchActiveWall", { wallId: wall.id }));
      this.thumbs.append(thumb);
    }
  }

  // -- focused view ----------------------------------------------------------------

  private focusedContent(doc: SessionDoc): ContentDoc | null {
    const wall = activeWall(doc);
    const vp = wall.viewports.find((v) => v.id === this.focusedViewportId) ??
      wall.viewports.find((v) => v.contentId) ?? wall.viewports[0];
    if (!vp) return null;
    this.focusedViewportId = vp.id;
    return vp.contentId ? doc.contents[vp.contentId] ?? null : null;
  }

  private renderFocus(doc: SessionDoc): void {
    this.focus.innerHTML = "";
    const content = this.focusedContent(doc);
    if (!content) {
      const hint = el("div", "focus-hint");
      hint.textContent = "tap a view in a wall thumbnail to focus it here";
      this.focus.append(hint);
      return;
    }
    const title = el("div", "focus-title");
    title.textContent = content.title || content.id;
    this.focus.append(title);

    const body = el("div", "focus-body");
    const fileUrl = (hash: string) =>
      `${this.baseUrl}/api/files/${hash}?token=${encodeURIComponent(this.token)}`;
    if (content.kind === "Image") {
      const img = document.createElement("img");
      img.src = fileUrl(content.source.file);
      body.append(img);
    } else if (content.kind === "Pdf") {
      const frame = document.createElement("iframe");
      frame.src = `${fileUrl(content.source.file)}#page=${content.viewState.page}`;
      body.append(frame);
    } else if (content.kind === "Video") {
      const video = document.createElement("video");
      video.src = fileUrl(content.source.file);
      video.controls = true;
      body.append(video);
    } else if (content.kind === "WebLink") {
      const link = document.createElement("a");
      link.href = content.source.url;
      link.target = "_blank";
      link.textContent = `open ${content.source.url}`;
      body.append(link);
    } else {
      const share = el("div", "share-placeholder");
      share.textContent = content.ended ? "share ended" : "live screen share";
      body.append(share);
    }
    this.focus.append(body);

    // shared navigation: every control round-trips through the server
    const controls = el("div", "focus-controls");
    if (content.kind === "Pdf") {
      controls.append(
        this.controlButton("◀ page", () => this.channel.sendCommand(
          "UpdateContentState",
          { contentId: content.id, page: Math.max(1, content.viewState.page - 1) })),
        this.controlButton("page ▶", () => this.channel.sendCommand(
          "UpdateContentState",
          { contentId: content.id, page: content.viewState.page + 1 })),
      );
    }
    controls.append(
      this.controlButton("zoom −", () => this.channel.sendCommand(
        "UpdateContentState",
        { contentId: content.id,
          zoom: Math.max(0.1, Math.round(content.viewState.zoom / 1.25 * 1e3) / 1e3) })),
      this.controlButton("zoom +", () => this.channel.sendCommand(
        "UpdateContentState",
        { contentId: content.id,
          zoom: Math.round(content.viewState.zoom * 1.25 * 1e3) / 1e3 })),
    );
    this.focus.append(controls);
    this.focus.append(this.renderNotes(doc, content));
  }

  private controlButton(label: string, run: () => void): HTMLElement {
    const button = el("button", "control-button");
    button.textContent = label;
    button.addEventListener("click", run);
    return button;
  }

  private renderNotes(doc: SessionDoc, content: ContentDoc): HTMLElement {
    const panel = el("div", "notes-panel");
    const heading = el("div", "notes-heading");
    heading.textContent = `notes on ${content.title || content.id}`;
    panel.append(heading);
    for (const note of notesForContent(doc, content.id)) {
      const item = el("div", "note-item");
      item.textContent = `${authorName(doc, note)}: ${note.text}`;
      panel.append(item);
    }
    const composer = el("div", "note-composer");
    const input = document.createElement("input");
    input.placeholder = "add a note…";
    const send = this.controlButton("add", () => {
      if (input.value.trim()) {
        const { variant, args } = addNoteCommand(content.id, input.value);
        this.channel.sendCommand(variant, args);
        input.value = "";
      }
    });
    composer.append(input, send);
    panel.append(composer);
    return panel;
  }

  // -- sidebar: layout tools, uploads, shares ----------------------------------------

  private renderSidebar(doc: SessionDoc): void {
    this.sidebar.innerHTML = "";
    const wall = activeWall(doc);

    const presetBox = el("div", "sidebar-box");
    presetBox.append(textEl("div", "sidebar-title", "presets"));
    const wizard = new PresetWizard(wall);
    for (const count of wizard.counts()) {
      wizard.variants(count).forEach((variant) => {
        const pick = el("button", "preset-pick");
        pick.title = `${count} views — ${variant.label}`;
        pick.append(miniPreview(wall, variant.rects));
        pick.addEventListener("click", () => {
          const { variant: v, args } = wizard.command(count, variant.variantIndex);
          this.channel.sendCommand(v, args);
        });
        presetBox.append(pick);
      });
    }
    this.sidebar.append(presetBox);

    const insertBox = el("div", "sidebar-box");
    insertBox.append(textEl("div", "sidebar-title", "insert a view"));
    const picker = new InsertPicker(wall);
    if (picker.error) {
      insertBox.append(textEl("div", "sidebar-hint", picker.error));
    }
    picker.candidates.slice(0, 6).forEach((candidate, index) => {
      const pick = el("button", "preset-pick");
      pick.title = `${candidate.kind} ${candidate.newRect.colSpan}x${candidate.newRect.rowSpan}`;
      pick.append(miniPreview(wall, [candidate.newRect]));
      pick.addEventListener("click", () => {
        const { variant, args } = picker.command(index);
        this.channel.sendCommand(variant, args);
      });
      insertBox.append(pick);
    });
    this.sidebar.append(insertBox);

    const shareBox = el("div", "sidebar-box");
    shareBox.append(textEl("div", "sidebar-title", "share"));
    const upload = document.createElement("input");
    upload.type = "file";
    upload.addEventListener("change", () => void this.uploadFile(upload));
    const shareButton = this.controlButton("share screen", () =>
      void this.startShare());
    shareBox.append(upload, shareButton);
    this.sidebar.append(shareBox);
  }

  private async uploadFile(input: HTMLInputElement): Promise<void> {
    const file = input.files?.[0];
    if (!file || !this.doc) return;
    const body = new FormData();
    body.append("file", file);
    const response = await fetch(
      `${this.baseUrl}/api/sessions/${this.doc.id}/files`,
      { method: "POST", body, headers: { Authorization: `Bearer ${this.token}` } });
    if (!response.ok) return;
    const { contentDescriptor } = await response.json();
    this.channel.sendCommand("RegisterContent", contentDescriptor);
    input.value = "";
  }

  private async startShare(): Promise<void> {
    try {
      const { command } = await this.shares.start();
      this.channel.sendCommand(command.variant, command.args);
    } catch {
      // permission denied: no command goes out
    }
  }
}

export { CustomLayoutBuilder };

function el(tag: string, className: string): HTMLElement {
  const node = document.createElement(tag);
  node.className = className;
  return node;
}

function textEl(tag: string, className: string, text: string): HTMLElement {
  const node = el(tag, className);
  node.textContent = text;
  return node;
}

function miniPreview(wall: WallDoc,
                     rects: { col: number; row: number; colSpan: number; rowSpan: number }[]): HTMLElement {
  const box = el("div", "mini-preview");
  for (const rect of rects) {
    const cell = el("div", "mini-cell");
    Object.assign(cell.style, {
      left: `${(rect.col / wall.gridCols) * 100}%`,
      top: `${(rect.row / wall.gridRows) * 100}%`,
      width: `${(rect.colSpan / wall.gridCols) * 100}%`,
      height: `${(rect.rowSpan / wall.gridRows) * 100}%`,
    });
    box.append(cell);
  }
  return box;
}
