// WebSocket client: connect, key handling, reconnect with a banner hook.
// The socket implementation is injectable so tests can drive a fake.

import {
  ClientMessage,
  ParseResult,
  hello,
  humanMove,
  parseServerMessage,
  serialize,
  tick,
} from "./protocol.js";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: string }) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export interface ClientHandlers {
  onMessage(result: ParseResult): void;
  onStatus(status: "connecting" | "open" | "closed"): void;
  onWarning?(text: string): void;
}

export const KEY_MOVES: Record<string, [number, number]> = {
  ArrowUp: [0, 1],
  ArrowDown: [0, -1],
  ArrowLeft: [-1, 0],
  ArrowRight: [1, 0],
};

export class LiveClient {
  private socket: SocketLike | null = null;
  private retryMs = 500;
  private closedByUser = false;
  sent: ClientMessage[] = [];

  constructor(private url: string, private handlers: ClientHandlers,
              private factory: SocketFactory,
              private schedule: (fn: () => void, ms: number) => void =
                (fn, ms) => setTimeout(fn, ms)) {}

  connect(): void {
    this.closedByUser = false;
    this.handlers.onStatus("connecting");
    const sock = this.factory(this.url);
    this.socket = sock;
    sock.onopen = () => {
      this.retryMs = 500;
      this.handlers.onStatus("open");
      this.sendMessage(hello());
    };
    sock.onmessage = (ev) => {
      const result = parseServerMessage(ev.data);
      if (result.kind === "unknown") {
        this.handlers.onWarning?.(
          `unknown message type: ${JSON.stringify(result.raw)}`);
      }
      this.handlers.onMessage(result);
    };
    sock.onclose = () => {
      this.handlers.onStatus("closed");
      if (!this.closedByUser) {
        const delay = this.retryMs;
        this.retryMs = Math.min(this.retryMs * 2, 8000);
        this.schedule(() => this.connect(), delay);
      }
    };
    sock.onerror = () => { /* onclose follows */ };
  }

  close(): void {
    this.closedByUser = true;
    this.socket?.close();
  }

  sendMessage(msg: ClientMessage): void {
    this.sent.push(msg);
    this.socket?.send(serialize(msg));
  }

  sendMove(dx: number, dy: number): void {
    this.sendMessage(humanMove(dx, dy));
  }

  sendTick(): void {
    this.sendMessage(tick());
  }

  // Returns true when the key mapped to a move (callers preventDefault).
  handleKey(key: string): boolean {
    const move = KEY_MOVES[key];
    if (!move) return false;
    this.sendMove(move[0], move[1]);
    return true;
  }
}

// One step of click-to-move seeking: the next unit move toward the target
// cell, or null when already there.
export function stepToward(from: number[],
                           target: number[]): [number, number] | null {
  const dx = Math.sign(target[0] - from[0]);
  const dy = Math.sign(target[1] - from[1]);
  if (dx === 0 && dy === 0) return null;
  return [dx, dy];
}
