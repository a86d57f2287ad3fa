// Browser bootstrap: create (or join) a session, wire the piano, the
// pointer-driven face, the chain canvas, and the prompt/metrics panel.

import { KeyAudio } from "./audio.js";
import { ClientView, SessionClient } from "./client.js";
import { FaceCursor } from "./face.js";
import { PianoView } from "./piano.js";
import { drawChain, expressionColor, silhouette } from "./render.js";
import { connectionText, promptText } from "./strings.js";

function requireElement<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el as T;
}

async function boot(): Promise<void> {
  const params = new URLSearchParams(location.search);
  const base = params.get("server") ?? "";
  const condition = params.get("condition") ?? "c-erik";
  const client = new SessionClient(base);
  const view = new ClientView();

  const canvas = requireElement<HTMLCanvasElement>("chain-canvas");
  const promptEl = requireElement<HTMLDivElement>("prompt");
  const statusEl = requireElement<HTMLDivElement>("status");
  const metricsEl = requireElement<HTMLDivElement>("metrics");
  const pianoEl = requireElement<HTMLDivElement>("piano");
  const playArea = requireElement<HTMLDivElement>("play-area");
  const audioToggle = requireElement<HTMLInputElement>("audio-toggle");
  const toastEl = requireElement<HTMLDivElement>("toast");

  const audio = new KeyAudio();
  audioToggle.addEventListener("change", () => {
    audio.enabled = audioToggle.checked;
  });
  client.onError = (message) => {
    toastEl.textContent = message;
    toastEl.classList.add("visible");
    setTimeout(() => toastEl.classList.remove("visible"), 2500);
  };

  const sessionId =
    params.get("session") ?? (await client.createSession({ condition, tick_rate_hz: 30 }));
  client.connectFrames(sessionId, view);

  let piano: PianoView | null = null;
  let face: FaceCursor | null = null;

  view.onChange(() => {
    if (view.snapshot && !piano) {
      const keyboard = view.snapshot.keyboard;
      piano = new PianoView(pianoEl, keyboard, (key) => {
        audio.play(keyboard.lowest_midi + key);
        void client.postInput(sessionId, { type: "key_press", key });
      });
      face = new FaceCursor(view.snapshot.scene, (input) => {
        void client.postInput(sessionId, input);
      });
      playArea.addEventListener("pointermove", (event) => {
        const rect = playArea.getBoundingClientRect();
        face?.pointerMove(
          (event.clientX - rect.left) / rect.width,
          (event.clientY - rect.top) / rect.height,
        );
      });
      playArea.addEventListener("pointerleave", () => face?.pointerLeave());
    }
  });

  function renderLoop(): void {
    view.checkStaleness(Date.now());
    statusEl.textContent = connectionText(view.connection);
    statusEl.className = `status ${view.connection}`;
    const frame = view.frame;
    if (frame && view.snapshot) {
      drawChain(canvas, silhouette(view.snapshot.chain, frame.angles_deg), {
        color: expressionColor(frame.expression),
      });
      promptEl.textContent = promptText(frame.prompt);
      piano?.setHighlights(view.highlights);
    }
    const metrics = view.snapshot?.metrics;
    if (metrics) {
      metricsEl.textContent =
        `guessing time ${metrics.time_s.toFixed(1)} s | ` +
        `wrong (hot/cold/total): ${metrics.wrong_hot}/${metrics.wrong_cold}/${metrics.wrong_total}`;
    }
    requestAnimationFrame(renderLoop);
  }
  // keep the metrics panel fresh: poll the state snapshot once a second
  setInterval(async () => {
    try {
      const response = await fetch(`${base}/sessions/${sessionId}/state`);
      if (response.ok) {
        const snapshot = await response.json();
        if (view.snapshot) {
          view.snapshot = { ...view.snapshot, metrics: snapshot.metrics, done: snapshot.done };
        }
      }
    } catch {
      // the staleness indicator already covers a dead server
    }
  }, 1000);
  requestAnimationFrame(renderLoop);
}

void boot();
