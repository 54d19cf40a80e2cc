// Canvas drawing from view state only.  The context is typed structurally
// so tests can record draw calls without a DOM.

import { ConfigMsg, StateUpdate } from "./protocol.js";
import {
  BetaBar,
  CanvasMap,
  ViewState,
  betaBars,
  cellRect,
  heatmapCells,
  toCanvas,
} from "./viewmodel.js";

export interface Ctx2D {
  fillStyle: string;
  strokeStyle: string;
  globalAlpha: number;
  lineWidth: number;
  font: string;
  clearRect(x: number, y: number, w: number, h: number): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  stroke(): void;
  fill(): void;
  fillText(text: string, x: number, y: number): void;
}

export function arenaMap(config: ConfigMsg, pixels: number): CanvasMap {
  return { scale: pixels / config.arena.side_length, height: pixels };
}

function heatColor(p: number): string {
  // Low mass: pale blue; high mass: deep red.
  const t = Math.min(1, Math.sqrt(p) * 2.2);
  const r = Math.round(40 + 215 * t);
  const g = Math.round(80 + 40 * (1 - t));
  const b = Math.round(220 * (1 - t) + 35);
  return `rgb(${r},${g},${b})`;
}

export function drawArena(ctx: Ctx2D, config: ConfigMsg,
                          map: CanvasMap): void {
  ctx.globalAlpha = 1;
  ctx.fillStyle = "#10141c";
  ctx.fillRect(0, 0, map.height, map.height);
  ctx.strokeStyle = "#2a3242";
  ctx.lineWidth = 1;
  const c = config.arena.cell_size;
  for (let i = 0; i <= config.arena.cols; i++) {
    const [x0, y0] = toCanvas(map, i * c, 0);
    const [x1, y1] = toCanvas(map, i * c, config.arena.rows * c);
    ctx.beginPath();
    ctx.moveTo(x0, y0);
    ctx.lineTo(x1, y1);
    ctx.stroke();
    const [hx0, hy0] = toCanvas(map, 0, i * c);
    const [hx1, hy1] = toCanvas(map, config.arena.cols * c, i * c);
    ctx.beginPath();
    ctx.moveTo(hx0, hy0);
    ctx.lineTo(hx1, hy1);
    ctx.stroke();
  }
  // Model goals.
  ctx.fillStyle = "#d4504c";
  for (const g of config.goals) {
    const [gx, gy] = toCanvas(map, (g[0] + 0.5) * c, (g[1] + 0.5) * c);
    ctx.beginPath();
    ctx.arc(gx, gy, 0.3 * c * map.scale, 0, 2 * Math.PI);
    ctx.fill();
  }
}

export function drawHeatmap(ctx: Ctx2D, config: ConfigMsg, map: CanvasMap,
                            update: StateUpdate | null, tau: number): void {
  const c = config.arena.cell_size;
  for (const cell of heatmapCells(update, tau)) {
    ctx.globalAlpha = Math.min(0.85, 0.15 + cell.p);
    ctx.fillStyle = heatColor(cell.p);
    const [x, y, w, h] = cellRect(map, c, cell.ix, cell.iy);
    ctx.fillRect(x, y, w * map.scale > 2 ? w : 2, h);
  }
  ctx.globalAlpha = 1;
}

export function drawPlan(ctx: Ctx2D, config: ConfigMsg, map: CanvasMap,
                         update: StateUpdate | null): void {
  if (!update || update.plan.waypoints.length === 0) return;
  const l = config.human_box_side;
  const halfX = (l + config.bound[0]) / 2;
  const halfY = (l + config.bound[1]) / 2;
  ctx.strokeStyle = "#49b675";
  ctx.lineWidth = 2;
  ctx.beginPath();
  update.plan.waypoints.forEach((wp, i) => {
    const [x, y] = toCanvas(map, wp[1], wp[2]);
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  });
  ctx.stroke();
  // Inflated collision rectangles, shaded by each waypoint's probability.
  for (const wp of update.plan.waypoints) {
    const pcoll = wp[4];
    ctx.globalAlpha = 0.25;
    ctx.strokeStyle = pcoll > config.p_threshold ? "#e05252" : "#49b675";
    ctx.lineWidth = 1;
    const [x, y] = toCanvas(map, wp[1] - halfX, wp[2] + halfY);
    ctx.strokeRect(x, y, 2 * halfX * map.scale, 2 * halfY * map.scale);
  }
  ctx.globalAlpha = 1;
}

export function drawAgents(ctx: Ctx2D, config: ConfigMsg, map: CanvasMap,
                           update: StateUpdate | null): void {
  if (!update) return;
  const c = config.arena.cell_size;
  // Human cell.
  ctx.fillStyle = "#e8b23c";
  const [hx, hy, hw, hh] = cellRect(map, c, update.human_cell[0],
                                    update.human_cell[1]);
  ctx.fillRect(hx, hy, hw, hh);
  // Tracked quad and its reference.
  const [rx, ry] = toCanvas(map, update.robot_pos[0], update.robot_pos[1]);
  ctx.fillStyle = "#6fa8dc";
  ctx.beginPath();
  ctx.arc(rx, ry, 0.35 * c * map.scale, 0, 2 * Math.PI);
  ctx.fill();
  if (update.robot_ref) {
    const [fx, fy] = toCanvas(map, update.robot_ref[0], update.robot_ref[1]);
    ctx.strokeStyle = "#cfe2f3";
    ctx.lineWidth = 1;
    ctx.beginPath();
    ctx.arc(fx, fy, 0.45 * c * map.scale, 0, 2 * Math.PI);
    ctx.stroke();
  }
}

export function drawBeliefBars(ctx: Ctx2D, update: StateUpdate | null,
                               width: number, height: number): void {
  ctx.globalAlpha = 1;
  ctx.fillStyle = "#10141c";
  ctx.fillRect(0, 0, width, height);
  const bars: BetaBar[] = betaBars(update);
  if (bars.length === 0) return;
  const bw = width / bars.length;
  ctx.fillStyle = "#6fa8dc";
  bars.forEach((bar, i) => {
    const h = bar.p * (height - 18);
    ctx.fillRect(i * bw + 2, height - 14 - h, bw - 4, h);
  });
  ctx.fillStyle = "#c9d2e0";
  ctx.font = "10px sans-serif";
  bars.forEach((bar, i) => {
    const label = bar.beta < 1 ? bar.beta.toFixed(2) : bar.beta.toFixed(1);
    ctx.fillText(label, i * bw + 2, height - 2);
  });
}

export function drawGoalBars(ctx: Ctx2D, update: StateUpdate | null,
                             width: number, height: number): void {
  ctx.globalAlpha = 1;
  ctx.fillStyle = "#10141c";
  ctx.fillRect(0, 0, width, height);
  const probs = update?.belief.goal_probs;
  if (!probs) return;
  const bw = width / probs.length;
  ctx.fillStyle = "#d4504c";
  probs.forEach((p, i) => {
    const h = p * (height - 18);
    ctx.fillRect(i * bw + 2, height - 14 - h, bw - 4, h);
  });
  ctx.fillStyle = "#c9d2e0";
  ctx.font = "10px sans-serif";
  probs.forEach((_, i) => ctx.fillText(`g${i + 1}`, i * bw + 2, height - 2));
}

export function metricsText(state: ViewState): string[] {
  const u = state.latest;
  if (!u) return ["waiting for state…"];
  const lines = [
    `t = ${u.metrics.sim_time.toFixed(2)} s   step ${u.step}`,
    `mean confidence = ${u.belief.mean_beta.toFixed(3)}`,
    `min ground distance = ${u.metrics.min_ground_distance.toFixed(3)} m`,
    `plan cost = ${u.plan.cost === null ? "—" : u.plan.cost.toFixed(2)}` +
      (u.plan.reached_goal ? "" : " (partial)"),
  ];
  if (u.metrics.completed && u.metrics.completion_time !== null) {
    lines.push(`completed in ${u.metrics.completion_time.toFixed(2)} s`);
  }
  if (u.metrics.collision) lines.push("COLLISION RECORDED");
  return lines;
}
