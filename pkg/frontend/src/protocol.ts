// Wire protocol v1: JSON frames tagged with a version and a type.
// Mirrors the server's schema; parseServerMessage never throws on unknown
// types so the caller can surface a warning instead of dropping silently.

export const PROTOCOL_VERSION = 1;

export type Hello = { v: 1; type: "hello" };
export type HumanMove = { v: 1; type: "human_move"; dx: number; dy: number };
export type Tick = { v: 1; type: "tick" };
export type ClientMessage = Hello | HumanMove | Tick;

export interface ArenaInfo {
  side_length: number;
  height: number;
  cell_size: number;
  cols: number;
  rows: number;
}

export interface ConfigMsg {
  v: 1;
  type: "config";
  arena: ArenaInfo;
  human_box_side: number;
  bound: number[];
  human_cell: number[];
  robot_start: number[];
  robot_goal: number[];
  goals: number[][];
  betas: number[];
  human_dt: number;
  plan_dt: number;
  p_threshold: number;
}

export interface BeliefInfo {
  betas: number[];
  probs: number[];
  goal_probs: number[] | null;
  mean_beta: number;
}

export interface StateUpdate {
  v: 1;
  type: "state_update";
  t: number;
  step: number;
  human_cell: number[];
  robot_pos: number[];
  robot_ref: number[] | null;
  belief: BeliefInfo;
  occupancy: { dt: number | null; cells: number[][] };
  plan: {
    cost: number | null;
    reached_goal: boolean;
    waypoints: number[][];
  };
  metrics: {
    min_ground_distance: number;
    sim_time: number;
    completed: boolean;
    completion_time: number | null;
    collision: boolean;
  };
}

export type Ack = { v: 1; type: "ack"; queued_move: number[] };
export type Heartbeat = { v: 1; type: "heartbeat"; t: number };
export type ErrorMsg = { v: 1; type: "error"; message: string };

export type ServerMessage = ConfigMsg | StateUpdate | Ack | Heartbeat |
  ErrorMsg;

export type ParseResult =
  | { kind: "ok"; message: ServerMessage }
  | { kind: "unknown"; raw: unknown }
  | { kind: "invalid"; reason: string };

const SERVER_TYPES = new Set(
  ["config", "state_update", "ack", "heartbeat", "error"]);

export function serialize(msg: ClientMessage): string {
  return JSON.stringify(msg);
}

export function hello(): Hello {
  return { v: PROTOCOL_VERSION, type: "hello" };
}

export function humanMove(dx: number, dy: number): HumanMove {
  if (Math.abs(dx) > 1 || Math.abs(dy) > 1) {
    throw new Error("human_move is limited to one cell per axis");
  }
  return { v: PROTOCOL_VERSION, type: "human_move", dx, dy };
}

export function tick(): Tick {
  return { v: PROTOCOL_VERSION, type: "tick" };
}

export function parseServerMessage(text: string): ParseResult {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch (e) {
    return { kind: "invalid", reason: `not JSON: ${e}` };
  }
  if (typeof raw !== "object" || raw === null) {
    return { kind: "invalid", reason: "message must be an object" };
  }
  const msg = raw as { v?: unknown; type?: unknown };
  if (msg.v !== PROTOCOL_VERSION) {
    return { kind: "invalid", reason: `unsupported version ${msg.v}` };
  }
  if (typeof msg.type !== "string" || !SERVER_TYPES.has(msg.type)) {
    return { kind: "unknown", raw };
  }
  return { kind: "ok", message: raw as ServerMessage };
}
