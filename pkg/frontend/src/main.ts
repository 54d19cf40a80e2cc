// DOM wiring: connect to the live service, steer the human with arrow keys
// or click-to-move, render every state_update, and export the session log.

import { LiveClient, stepToward } from "./client.js";
import {
  Ctx2D,
  arenaMap,
  drawAgents,
  drawArena,
  drawBeliefBars,
  drawGoalBars,
  drawHeatmap,
  drawPlan,
  metricsText,
} from "./render.js";
import {
  ViewState,
  applyServerMessage,
  exportTranscript,
  initialState,
  maxTau,
  setConnection,
  setTau,
} from "./viewmodel.js";

const ARENA_PIXELS = 560;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function main(): void {
  const arenaCanvas = el<HTMLCanvasElement>("arena");
  const beliefCanvas = el<HTMLCanvasElement>("belief");
  const goalCanvas = el<HTMLCanvasElement>("goalpost");
  const tauSlider = el<HTMLInputElement>("tau");
  const tauLabel = el<HTMLSpanElement>("tau-label");
  const banner = el<HTMLDivElement>("banner");
  const metrics = el<HTMLPreElement>("metrics");
  const exportBtn = el<HTMLButtonElement>("export");

  let state: ViewState = initialState();
  let target: number[] | null = null;

  const url = new URLSearchParams(location.search).get("ws") ??
    `ws://${location.hostname || "127.0.0.1"}:8008/ws`;

  function render(): void {
    banner.textContent = state.connection === "open"
      ? "" : `connection ${state.connection}… retrying`;
    banner.style.display = state.connection === "open" ? "none" : "block";
    if (state.config) {
      const ctx = arenaCanvas.getContext("2d") as unknown as Ctx2D;
      const map = arenaMap(state.config, ARENA_PIXELS);
      drawArena(ctx, state.config, map);
      drawHeatmap(ctx, state.config, map, state.latest, state.tau);
      drawPlan(ctx, state.config, map, state.latest);
      drawAgents(ctx, state.config, map, state.latest);
    }
    drawBeliefBars(beliefCanvas.getContext("2d") as unknown as Ctx2D,
                   state.latest, beliefCanvas.width, beliefCanvas.height);
    drawGoalBars(goalCanvas.getContext("2d") as unknown as Ctx2D,
                 state.latest, goalCanvas.width, goalCanvas.height);
    tauSlider.max = String(maxTau(state));
    tauLabel.textContent = `forecast step ${state.tau}`;
    metrics.textContent = metricsText(state).join("\n");
  }

  const client = new LiveClient(url, {
    onMessage(result) {
      state = applyServerMessage(state, result);
      if (result.kind === "ok" && result.message.type === "state_update" &&
          target) {
        const move = stepToward(result.message.human_cell, target);
        if (move) client.sendMove(move[0], move[1]);
        else target = null;
      }
      render();
    },
    onStatus(status) {
      state = setConnection(state, status);
      render();
    },
    onWarning(text) {
      console.warn(text);
    },
  }, (wsUrl) => new WebSocket(wsUrl) as unknown as
    import("./client.js").SocketLike);

  window.addEventListener("keydown", (ev) => {
    if (client.handleKey(ev.key)) {
      target = null;
      ev.preventDefault();
    }
  });

  arenaCanvas.addEventListener("click", (ev) => {
    if (!state.config) return;
    const rect = arenaCanvas.getBoundingClientRect();
    const map = arenaMap(state.config, ARENA_PIXELS);
    const x = (ev.clientX - rect.left) / map.scale;
    const y = (ARENA_PIXELS - (ev.clientY - rect.top)) / map.scale;
    const c = state.config.arena.cell_size;
    target = [Math.floor(x / c), Math.floor(y / c)];
  });

  tauSlider.addEventListener("input", () => {
    state = setTau(state, Number(tauSlider.value));
    render();
  });

  exportBtn.addEventListener("click", () => {
    const blob = new Blob([exportTranscript(state)],
                          { type: "application/json" });
    const a = document.createElement("a");
    a.href = URL.createObjectURL(blob);
    a.download = "session_transcript.json";
    a.click();
    URL.revokeObjectURL(a.href);
  });

  client.connect();
  render();
}

main();
