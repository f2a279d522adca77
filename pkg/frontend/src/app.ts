/** DOM wiring: one session at a time, one in-flight message per session.
 *  All logic that turns payloads into numbers on screen lives in the
 *  viewmodel; this file only moves strings into elements. */

import { ApiClient, ApiError } from "./api.js";
import { traceChartSvg } from "./chart.js";
import { sendDisabled, traceView, turnView, type TurnView } from "./viewmodel.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const apiBase = new URLSearchParams(window.location.search).get("api") ?? "";
const client = new ApiClient(apiBase);

const transcript = el<HTMLDivElement>("transcript");
const input = el<HTMLInputElement>("message-input");
const sendBtn = el<HTMLButtonElement>("send");
const resetBtn = el<HTMLButtonElement>("new-session");
const chartHost = el<HTMLDivElement>("chart");
const empathyHost = el<HTMLDivElement>("empathy");
const banner = el<HTMLDivElement>("banner");

let sessionId: string | null = null;
let inFlight = false;

function refreshControls(): void {
  input.disabled = inFlight || sessionId === null;
  sendBtn.disabled = inFlight || sessionId === null || sendDisabled(input.value);
}

function bubble(kind: "user" | "bot" | "error", text: string): HTMLDivElement {
  const div = document.createElement("div");
  div.className = `bubble ${kind}`;
  div.textContent = text;
  transcript.appendChild(div);
  transcript.scrollTop = transcript.scrollHeight;
  return div;
}

function renderTurn(view: TurnView, botBubble: HTMLDivElement): void {
  botBubble.textContent = view.replyText;
  const badge = document.createElement("span");
  badge.className = "badge";
  badge.textContent = view.badge;
  badge.title = `valence ${view.valenceFull}, arousal ${view.arousalFull}`;
  const meta = document.createElement("div");
  meta.className = "meta";
  meta.textContent =
    `v ${view.valenceDisplay} a ${view.arousalDisplay} -> ${view.nextBadge}`;
  botBubble.prepend(badge);
  botBubble.appendChild(meta);
  empathyHost.textContent = `empathy valence ${view.empathyDisplay}`;
  empathyHost.title = view.empathyFull;
}

async function startSession(): Promise<void> {
  banner.hidden = true;
  sessionId = null;
  refreshControls();
  try {
    sessionId = (await client.newSession()).session_id;
  } catch (err) {
    banner.textContent =
      err instanceof ApiError ? `server unreachable: ${err.message}` : String(err);
    banner.hidden = false;
    return;
  } finally {
    refreshControls();
  }
  transcript.innerHTML = "";
  chartHost.textContent = "no turns yet";
  empathyHost.textContent = "";
  empathyHost.title = "";
}

async function send(): Promise<void> {
  const text = input.value;
  if (inFlight || sessionId === null || sendDisabled(text)) return;
  inFlight = true;
  refreshControls();
  bubble("user", text);
  input.value = "";
  const bot = bubble("bot", "…");
  try {
    const payload = await client.postMessage(sessionId, text);
    renderTurn(turnView(payload), bot);
    const trace = await client.getTrace(sessionId);
    chartHost.innerHTML = traceChartSvg(traceView(trace.valence_trace));
  } catch (err) {
    bot.remove();
    bubble("error", err instanceof ApiError ? `${err.code}: ${err.message}` : String(err));
  } finally {
    inFlight = false;
    refreshControls();
  }
}

sendBtn.addEventListener("click", () => void send());
resetBtn.addEventListener("click", () => void startSession());
input.addEventListener("input", refreshControls);
input.addEventListener("keydown", (ev) => {
  if (ev.key === "Enter") void send();
});

void startSession();
