import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { describe, expect, test } from "vitest";

import { parseServerMessage } from "../src/protocol.js";
import {
  ViewState,
  applyServerMessage,
  betaBars,
  cellRect,
  exportTranscript,
  heatmapCells,
  initialState,
  lowBetaMass,
  maxTau,
  setTau,
  toCanvas,
} from "../src/viewmodel.js";

const here = dirname(fileURLToPath(import.meta.url));
const fixture = JSON.parse(
  readFileSync(join(here, "fixtures", "spill_transcript.json"), "utf-8"));

function replay(): ViewState {
  let state = initialState();
  for (const msg of fixture.messages) {
    state = applyServerMessage(state,
                               parseServerMessage(JSON.stringify(msg)));
  }
  return state;
}

describe("view model", () => {
  test("replaying a transcript is deterministic", () => {
    const a = replay();
    const b = replay();
    expect(a).toEqual(b);
    expect(a.updatesRendered).toBe(fixture.messages.length - 1);
    expect(a.config).not.toBeNull();
    expect(a.latest).not.toBeNull();
  });

  test("every state_update is rendered exactly once", () => {
    let state = initialState();
    let renders = 0;
    for (const msg of fixture.messages) {
      const before = state.updatesRendered;
      state = applyServerMessage(state,
                                 parseServerMessage(JSON.stringify(msg)));
      if (msg.type === "state_update") {
        renders += 1;
        expect(state.updatesRendered).toBe(before + 1);
      } else {
        expect(state.updatesRendered).toBe(before);
      }
    }
    expect(state.updatesRendered).toBe(renders);
  });

  test("confidence bars shift toward low values during the detour", () => {
    const state = replay();
    const [detourStart, detourEnd] = fixture.detour_steps;
    const before = state.beliefHistory.filter((s) => s.step < detourStart);
    const during = state.beliefHistory.filter(
      (s) => s.step >= detourStart && s.step <= detourEnd);
    const preLow = lowBetaMass(before[before.length - 1]);
    const midLow = Math.max(...during.map((s) => lowBetaMass(s)));
    expect(midLow).toBeGreaterThan(preLow * 2);
    // And the mean tracks the server's belief trace shape: a visible dip.
    const preMean = before[before.length - 1].meanBeta;
    const midMean = Math.min(...during.map((s) => s.meanBeta));
    expect(midMean).toBeLessThan(preMean / 2);
  });

  test("unknown messages bump the warning counter and stay in the log", () => {
    let state = initialState();
    state = applyServerMessage(
      state, parseServerMessage('{"v": 1, "type": "mystery"}'));
    expect(state.warnings).toBe(1);
    expect(state.transcript.length).toBe(1);
  });

  test("tau selection clamps to the forecast horizon", () => {
    let state = replay();
    const max = maxTau(state);
    expect(max).toBeGreaterThan(0);
    state = setTau(state, 9999);
    expect(state.tau).toBe(max);
    state = setTau(state, -3);
    expect(state.tau).toBe(0);
  });

  test("heatmap selector returns the requested step only", () => {
    const state = replay();
    const cells = heatmapCells(state.latest, 2);
    expect(cells.length).toBeGreaterThan(0);
    const total = cells.reduce((a, c) => a + c.p, 0);
    expect(total).toBeGreaterThan(0.5);
    expect(total).toBeLessThanOrEqual(1.0 + 1e-9);
  });

  test("beta bars expose the grid in order", () => {
    const state = replay();
    const bars = betaBars(state.latest);
    expect(bars.length).toBe(10);
    for (let i = 1; i < bars.length; i++) {
      expect(bars[i].beta).toBeGreaterThan(bars[i - 1].beta);
    }
    const mass = bars.reduce((a, b) => a + b.p, 0);
    expect(mass).toBeCloseTo(1.0, 9);
  });

  test("transcript export reproduces the received messages", () => {
    const state = replay();
    expect(JSON.parse(exportTranscript(state))).toEqual(fixture.messages);
  });

  test("canvas mapping flips y and scales cells", () => {
    const map = { scale: 100, height: 500 };
    expect(toCanvas(map, 0, 0)).toEqual([0, 500]);
    expect(toCanvas(map, 1.0, 5.0)).toEqual([100, 0]);
    const [x, y, w, h] = cellRect(map, 0.5, 1, 1);
    expect([x, y, w, h]).toEqual([50, 400, 50, 50]);
  });
});
