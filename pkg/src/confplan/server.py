"""Live-loop service: one simulation session per websocket connection.

The browser (or any client) steers the human one grid cell per tick and
receives a state_update after every tick with the belief marginals, sparse
occupancy forecast, and the current plan.  With ``tick_hz > 0`` the human
clock runs on a wall-clock timer and an absent command means "stay"; with
``tick_hz = 0`` the client drives the clock explicitly with tick messages,
which keeps scripted transcripts deterministic.
"""

from __future__ import annotations

import asyncio
import contextlib

from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from . import wire
from .scenario import ScenarioConfig
from .simulation import SimSession

HEARTBEAT_PERIOD = 5.0


class Session:
    """Connection state: the simulator plus the queued human command."""

    def __init__(self, cfg: ScenarioConfig):
        self.sim = SimSession(cfg, live=True)
        self.queued = (0, 0)

    def queue_move(self, dx: int, dy: int) -> None:
        cell = self.sim.human_cell
        target = (cell[0] + dx, cell[1] + dy)
        if not self.sim.arena.contains(target):
            raise ValueError(f"move to {target} leaves the arena")
        self.queued = (dx, dy)

    def tick(self) -> dict:
        dx, dy = self.queued
        self.queued = (0, 0)
        self.sim.live_tick(dx, dy)
        return wire.state_update(self.sim)


def create_app(cfg: ScenarioConfig, tick_hz: float = 0.0,
               top_k: int = 64) -> FastAPI:
    app = FastAPI(title="confplan live loop")

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        session = Session(cfg)
        loop = asyncio.get_event_loop()
        send_lock = asyncio.Lock()

        async def send(msg: dict) -> None:
            async with send_lock:
                await ws.send_text(wire.serialize(msg))

        async def timer() -> None:
            period = 1.0 / tick_hz
            last_beat = loop.time()
            while True:
                await asyncio.sleep(period)
                # The planner runs inside tick(); keep it off the event loop
                # so incoming messages are never blocked.  A slow cycle just
                # delays the next tick while the previous plan keeps flying.
                update = await loop.run_in_executor(None, session.tick)
                await send(update)
                if loop.time() - last_beat >= HEARTBEAT_PERIOD:
                    await send(wire.heartbeat(session.sim.sim_time()))
                    last_beat = loop.time()

        timer_task = asyncio.create_task(timer()) if tick_hz > 0 else None
        try:
            while True:
                text = await ws.receive_text()
                try:
                    msg = wire.parse(text)
                except wire.WireError as e:
                    await send(wire.error(str(e)))
                    continue
                if msg["type"] == "hello":
                    await send(wire.config_message(session.sim))
                elif msg["type"] == "human_move":
                    try:
                        session.queue_move(msg["dx"], msg["dy"])
                    except ValueError as e:
                        await send(wire.error(str(e)))
                    else:
                        await send(wire.ack(msg["dx"], msg["dy"]))
                elif msg["type"] == "tick":
                    if timer_task is not None:
                        await send(wire.error(
                            "ticks are timer-driven on this server"))
                    else:
                        await send(session.tick())
        except WebSocketDisconnect:
            pass
        finally:
            if timer_task is not None:
                timer_task.cancel()
                with contextlib.suppress(asyncio.CancelledError):
                    await timer_task

    return app


def serve(cfg: ScenarioConfig, port: int = 8008, host: str = "127.0.0.1",
          tick_hz: float = 4.0) -> None:
    """Run the live service (blocking)."""
    import uvicorn

    uvicorn.run(create_app(cfg, tick_hz=tick_hz), host=host, port=port,
                log_level="warning")
