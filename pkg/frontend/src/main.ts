/**
 * Entry point: login, session pick, display mode, then wire the channel to
 * the chosen view. Wall mode is meant for the shared display (launch with
 * #mode=wall), device mode for personal laptops/tablets/phones.
 */

import { SessionChannel } from "./connection.js";
import { DeviceView } from "./device_view.js";
import { ScreenShareManager } from "./screenshare.js";
import { WallView } from "./wall_view.js";

const app = document.getElementById("app")!;
const baseUrl = window.location.origin;

interface SessionSummary {
  id: string;
  name: string;
  participantCount: number;
}

async function api<T>(path: string, token: string | null,
                      init: RequestInit = {}): Promise<T> {
  const headers: Record<string, string> = token
    ? { Authorization: `Bearer ${token}` } : {};
  if (init.body && typeof init.body === "string") {
    headers["Content-Type"] = "application/json";
  }
  const response = await fetch(`${baseUrl}${path}`, { ...init, headers });
  if (!response.ok) throw new Error(`${path}: ${response.status}`);
  return response.json() as Promise<T>;
}

function form(title: string): { box: HTMLElement; submit: HTMLButtonElement } {
  app.innerHTML = "";
  const box = document.createElement("div");
  box.className = "login-box";
  const heading = document.createElement("h1");
  heading.textContent = title;
  const submit = document.createElement("button");
  submit.textContent = "continue";
  box.append(heading);
  app.append(box);
  return { box, submit };
}

async function loginFlow(): Promise<string> {
  return new Promise((resolve) => {
    const { box, submit } = form("join the wall");
    const name = document.createElement("input");
    name.placeholder = "name";
    const secret = document.createElement("input");
    secret.placeholder = "secret";
    secret.type = "password";
    const error = document.createElement("div");
    error.className = "login-error";
    box.append(name, secret, submit, error);
    submit.addEventListener("click", async () => {
      try {
        const { token } = await api<{ token: string }>(
          "/api/login", null,
          { method: "POST", body: JSON.stringify({ name: name.value, secret: secret.value }) });
        resolve(token);
      } catch {
        error.textContent = "login failed";
      }
    });
  });
}

async function pickSession(token: string): Promise<string> {
  const sessions = await api<SessionSummary[]>("/api/sessions", token);
  return new Promise((resolve) => {
    const { box, submit } = form("pick a session");
    const list = document.createElement("div");
    for (const session of sessions) {
      const row = document.createElement("button");
      row.className = "session-row";
      row.textContent = `${session.name} (${session.participantCount} online)`;
      row.addEventListener("click", () => resolve(session.id));
      list.append(row);
    }
    const name = document.createElement("input");
    name.placeholder = "or create a new session…";
    submit.textContent = "create";
    submit.addEventListener("click", async () => {
      if (!name.value.trim()) return;
      const { sessionId } = await api<{ sessionId: string }>(
        "/api/sessions", token,
        { method: "POST", body: JSON.stringify({ name: name.value }) });
      resolve(sessionId);
    });
    box.append(list, name, submit);
  });
}

function displayMode(): "wall" | "device" {
  return new URLSearchParams(window.location.hash.slice(1)).get("mode") === "wall"
    ? "wall" : "device";
}

async function start(): Promise<void> {
  const token = await loginFlow();
  const sessionId = await pickSession(token);
  const mode = displayMode();
  app.innerHTML = "";

  const shares = new ScreenShareManager();
  const channel = new SessionChannel({
    baseUrl, sessionId, token,
    role: mode === "wall" ? "WallDisplay" : "PersonalDevice",
    clientTag: `${mode}-${Math.random().toString(36).slice(2, 8)}`,
  }, {});

  if (mode === "wall") {
    const view = new WallView(app, channel, baseUrl, token, shares);
    channel.events = {
      onState: (doc) => view.render(doc),
      onCursor: (cursor) => view.onCursor(cursor),
      onConnection: (up) => view.setConnected(up),
    };
  } else {
    const view = new DeviceView(app, channel, baseUrl, token, shares);
    channel.events = {
      onState: (doc) => view.render(doc),
      onReject: (_rid, reason, detail) => console.warn("rejected:", reason, detail),
    };
  }
  channel.connect();
  window.addEventListener("beforeunload", () => {
    shares.stopAll();
    channel.close();
  });
}

void start();
