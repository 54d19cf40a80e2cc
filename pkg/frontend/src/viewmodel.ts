// Pure view state: a reducer over received messages plus display-only
// selectors.  Nothing here computes physics; everything rendered comes
// from state_update payloads, so replaying a transcript reproduces the
// exact same render state.

import {
  ConfigMsg,
  ParseResult,
  ServerMessage,
  StateUpdate,
} from "./protocol.js";

export type Connection = "connecting" | "open" | "closed";

export interface BeliefSample {
  step: number;
  t: number;
  probs: number[];
  meanBeta: number;
}

export interface ViewState {
  connection: Connection;
  config: ConfigMsg | null;
  latest: StateUpdate | null;
  beliefHistory: BeliefSample[];
  tau: number;
  lastError: string | null;
  warnings: number;
  updatesRendered: number;
  transcript: unknown[];
}

export function initialState(): ViewState {
  return {
    connection: "connecting",
    config: null,
    latest: null,
    beliefHistory: [],
    tau: 0,
    lastError: null,
    warnings: 0,
    updatesRendered: 0,
    transcript: [],
  };
}

export function applyServerMessage(state: ViewState,
                                   result: ParseResult): ViewState {
  if (result.kind === "invalid") {
    return { ...state, lastError: result.reason };
  }
  if (result.kind === "unknown") {
    // Never dropped silently: counted here, logged by the caller.
    return {
      ...state,
      warnings: state.warnings + 1,
      transcript: [...state.transcript, result.raw],
    };
  }
  const msg = result.message;
  const next: ViewState = {
    ...state,
    transcript: [...state.transcript, msg],
  };
  switch (msg.type) {
    case "config":
      return { ...next, config: msg };
    case "state_update":
      return {
        ...next,
        latest: msg,
        updatesRendered: state.updatesRendered + 1,
        beliefHistory: [...state.beliefHistory, {
          step: msg.step,
          t: msg.t,
          probs: msg.belief.probs,
          meanBeta: msg.belief.mean_beta,
        }],
      };
    case "error":
      return { ...next, lastError: msg.message };
    case "ack":
    case "heartbeat":
      return next;
  }
}

export function setConnection(state: ViewState,
                              connection: Connection): ViewState {
  return { ...state, connection };
}

export function setTau(state: ViewState, tau: number): ViewState {
  const max = maxTau(state);
  return { ...state, tau: Math.max(0, Math.min(Math.floor(tau), max)) };
}

export function maxTau(state: ViewState): number {
  const cells = state.latest?.occupancy.cells ?? [];
  let max = 0;
  for (const c of cells) max = Math.max(max, c[0]);
  return max;
}

export interface HeatCell {
  ix: number;
  iy: number;
  p: number;
}

// Occupancy records arrive as [tau, row, col, p] with row = iy, col = ix.
export function heatmapCells(update: StateUpdate | null,
                             tau: number): HeatCell[] {
  if (!update) return [];
  return update.occupancy.cells
    .filter((c) => c[0] === tau)
    .map((c) => ({ ix: c[2], iy: c[1], p: c[3] }));
}

export interface BetaBar {
  beta: number;
  p: number;
}

export function betaBars(update: StateUpdate | null): BetaBar[] {
  if (!update) return [];
  return update.belief.betas.map((b, i) => ({
    beta: b,
    p: update.belief.probs[i],
  }));
}

export function lowBetaMass(sample: BeliefSample, count = 3): number {
  return sample.probs.slice(0, count).reduce((a, b) => a + b, 0);
}

export function exportTranscript(state: ViewState): string {
  return JSON.stringify(state.transcript);
}

// Arena (meters, y up) -> canvas pixels (y down).
export interface CanvasMap {
  scale: number;
  height: number;
}

export function toCanvas(map: CanvasMap, x: number,
                         y: number): [number, number] {
  return [x * map.scale, map.height - y * map.scale];
}

export function cellRect(map: CanvasMap, cellSize: number, ix: number,
                         iy: number): [number, number, number, number] {
  const [px, py] = toCanvas(map, ix * cellSize, (iy + 1) * cellSize);
  const s = cellSize * map.scale;
  return [px, py, s, s];
}
