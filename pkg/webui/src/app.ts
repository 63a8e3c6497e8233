// Page wiring: a full-screen blank typing surface streaming taps to the
// decode service, a live text readout, and an optional transcription task
// with highlight / asterisk / silent feedback.  Configured via the query
// string: ?server=host:port&mode=highlight|asterisk|none&task=off|<phrase>

import { SessionClient } from "./client.js";
import type { Transport } from "./client.js";
import { TranscriptionTask } from "./transcription.js";
import type { FeedbackMode } from "./transcription.js";
import { WpmTimer } from "./wpm.js";

const TASKS = [
  "the cat sat on the mat.",
  "it's a new day",
  "we can fix the old clock.",
  "she reads by the quiet lake.",
  "every jump was a big win.",
  "the dog naps near my desk.",
];

interface PageConfig {
  server: string;
  mode: FeedbackMode;
  tasks: string[] | null; // null = free typing
}

function readConfig(): PageConfig {
  const q = new URLSearchParams(location.search);
  const rawMode = q.get("mode") ?? "highlight";
  const mode: FeedbackMode =
    rawMode === "asterisk" || rawMode === "none" ? rawMode : "highlight";
  const task = q.get("task");
  return {
    server: q.get("server") ?? location.host,
    mode,
    tasks: task === "off" ? null : task ? [task] : TASKS,
  };
}

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing element #${id}`);
  return node as T;
}

// control characters the decoder can emit, made visible in the readout:
// enter becomes a return arrow, padding a middle dot
const ENTER_GLYPH = String.fromCharCode(0x23ce);
const PAD_RE = new RegExp(String.fromCharCode(0), "g");
const PAD_GLYPH = String.fromCharCode(0xb7);

function printable(text: string): string {
  return text.replace(/\n/g, ENTER_GLYPH).replace(PAD_RE, PAD_GLYPH);
}

function screenMm(): [number, number] {
  const pxToMm = 25.4 / 96; // CSS reference pixel
  return [innerWidth * pxToMm, innerHeight * pxToMm];
}

function main(): void {
  const cfg = readConfig();
  const banner = el<HTMLDivElement>("banner");
  const surface = el<HTMLCanvasElement>("surface");
  const readout = el<HTMLDivElement>("readout");
  const taskLine = el<HTMLDivElement>("task-line");
  const wpmLabel = el<HTMLSpanElement>("wpm");
  const statusDot = el<HTMLSpanElement>("status");
  const deleteBtn = el<HTMLButtonElement>("delete");
  const proceedBtn = el<HTMLButtonElement>("proceed");

  let taskIndex = 0;
  let task = cfg.tasks ? new TranscriptionTask(cfg.tasks[0], cfg.mode) : null;
  const timer = new WpmTimer();
  const ctx = surface.getContext("2d");
  let ripples: { x: number; y: number; at: number }[] = [];
  let toastUntil = 0; // renders keep the banner up until this stamp

  const client = new SessionClient({
    onChange: render,
    onError: (code, detail) => {
      banner.textContent = `${code}: ${detail}`;
      toastUntil = performance.now() + 4000;
      setTimeout(render, 4100);
      render();
    },
  });

  function connect(): void {
    const ws = new WebSocket(`ws://${cfg.server}/ws`);
    const transport: Transport = {
      send: (data) => ws.send(data),
      close: () => ws.close(),
    };
    const epoch = client.attach(transport);
    ws.onopen = () => client.hello(screenMm());
    ws.onmessage = (ev) => client.handleRaw(String(ev.data), epoch);
    ws.onclose = () => client.dropped(epoch);
    ws.onerror = () => ws.close();
  }

  function startOver(): void {
    task?.reset();
    timer.reset();
    client.reset();
    render();
  }

  function nextTask(): void {
    if (!cfg.tasks) return;
    taskIndex = (taskIndex + 1) % cfg.tasks.length;
    task = new TranscriptionTask(cfg.tasks[taskIndex], cfg.mode);
    timer.reset();
    client.reset();
    render();
  }

  surface.addEventListener("pointerdown", (ev) => {
    if (client.status !== "live") return;
    if (task && !task.accept()) return; // budget spent for this phrase
    const rect = surface.getBoundingClientRect();
    const x = Math.min(1, Math.max(0, (ev.clientX - rect.left) / rect.width));
    const y = Math.min(1, Math.max(0, (ev.clientY - rect.top) / rect.height));
    timer.mark(ev.timeStamp);
    client.touch(x, y, ev.timeStamp);
    ripples.push({ x: ev.clientX, y: ev.clientY, at: performance.now() });
    render();
  });

  deleteBtn.addEventListener("click", startOver);
  proceedBtn.addEventListener("click", nextTask);
  addEventListener("resize", sizeSurface);
  addEventListener("beforeunload", () => client.bye());

  function sizeSurface(): void {
    surface.width = innerWidth;
    surface.height = innerHeight;
  }

  function drawRipples(): void {
    if (!ctx) return;
    const now = performance.now();
    ctx.clearRect(0, 0, surface.width, surface.height);
    ripples = ripples.filter((r) => now - r.at < 600);
    for (const r of ripples) {
      const age = (now - r.at) / 600;
      ctx.beginPath();
      ctx.arc(r.x, r.y, 6 + age * 22, 0, 2 * Math.PI);
      ctx.strokeStyle = `rgba(126, 231, 196, ${1 - age})`;
      ctx.lineWidth = 2;
      ctx.stroke();
    }
    if (ripples.length > 0) requestAnimationFrame(drawRipples);
  }

  function render(): void {
    statusDot.dataset.state = client.status;
    if (client.status === "closed") {
      banner.textContent = "connection lost. ";
      const retry = document.createElement("a");
      retry.href = "#";
      retry.textContent = "reconnect";
      retry.onclick = (ev) => {
        ev.preventDefault();
        connect();
      };
      banner.append(retry);
    }
    const toasting = performance.now() < toastUntil;
    banner.classList.toggle("hidden", client.status !== "closed" && !toasting);

    readout.textContent = printable(task ? task.feedback(client.text) : client.text);

    if (task) {
      taskLine.replaceChildren();
      const done = document.createElement("span");
      done.className = "hl";
      done.textContent = task.phrase.slice(0, task.highlighted);
      const rest = document.createElement("span");
      rest.textContent = task.phrase.slice(task.highlighted);
      taskLine.append(done, rest);
      proceedBtn.disabled = !task.complete;
    } else {
      taskLine.textContent = "free typing";
      proceedBtn.disabled = true;
    }

    const estimate = timer.read(client.text.length);
    wpmLabel.textContent = estimate === null ? "-" : estimate.toFixed(1);
    drawRipples();
  }

  sizeSurface();
  render();
  connect();
}

main();
