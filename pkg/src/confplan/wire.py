"""Message schema for the live-loop service.

All frames are JSON objects with a protocol version tag ``v`` and a ``type``
field.  Client -> server: hello, human_move(dx, dy), tick.  Server ->
client: config, ack, state_update, heartbeat, error.  serialize/parse round-
trip every message exactly.
"""

from __future__ import annotations

import json
import math

PROTOCOL_VERSION = 1

CLIENT_TYPES = ("hello", "human_move", "tick")
SERVER_TYPES = ("config", "ack", "state_update", "heartbeat", "error")


class WireError(Exception):
    """Malformed or unsupported message."""


def serialize(msg: dict) -> str:
    return json.dumps(msg, sort_keys=True, separators=(",", ":"))


def parse(text: str) -> dict:
    try:
        msg = json.loads(text)
    except json.JSONDecodeError as e:
        raise WireError(f"not JSON: {e}") from e
    if not isinstance(msg, dict):
        raise WireError("message must be an object")
    if msg.get("v") != PROTOCOL_VERSION:
        raise WireError(f"unsupported protocol version {msg.get('v')!r}")
    mtype = msg.get("type")
    if mtype not in CLIENT_TYPES + SERVER_TYPES:
        raise WireError(f"unknown message type {mtype!r}")
    if mtype == "human_move":
        dx, dy = msg.get("dx"), msg.get("dy")
        if not (isinstance(dx, int) and isinstance(dy, int)):
            raise WireError("human_move needs integer dx, dy")
        if abs(dx) > 1 or abs(dy) > 1:
            raise WireError("human_move is limited to one cell per axis")
    return msg


def hello() -> dict:
    return {"v": PROTOCOL_VERSION, "type": "hello"}


def human_move(dx: int, dy: int) -> dict:
    return {"v": PROTOCOL_VERSION, "type": "human_move", "dx": dx, "dy": dy}


def tick() -> dict:
    return {"v": PROTOCOL_VERSION, "type": "tick"}


def error(message: str) -> dict:
    return {"v": PROTOCOL_VERSION, "type": "error", "message": message}


def heartbeat(t: float) -> dict:
    return {"v": PROTOCOL_VERSION, "type": "heartbeat", "t": t}


def ack(dx: int, dy: int) -> dict:
    return {"v": PROTOCOL_VERSION, "type": "ack", "queued_move": [dx, dy]}


def config_message(session) -> dict:
    cfg = session.cfg
    return {
        "v": PROTOCOL_VERSION,
        "type": "config",
        "arena": {
            "side_length": cfg.arena_side,
            "height": cfg.arena_height,
            "cell_size": cfg.cell_size,
            "cols": session.arena.cols,
            "rows": session.arena.rows,
        },
        "human_box_side": cfg.human_box_side,
        "bound": list(cfg.robot.bound),
        "human_cell": list(session.human_cell),
        "robot_start": list(cfg.robot.start),
        "robot_goal": list(cfg.robot.goal),
        "goals": [list(g) for g in session.model.goals],
        "betas": [float(b) for b in session.belief.betas],
        "human_dt": session.human_dt,
        "plan_dt": session.plan_dt,
        "p_threshold": cfg.planner.p_threshold,
    }


def state_update(session, top_k: int = 64) -> dict:
    """Snapshot of the loop: belief marginals, sparse occupancy, plan."""
    belief = session.belief
    goal_probs = (list(map(float, belief.goal_marginal()))
                  if belief.joint else None)
    cells = []
    pred = session.prediction
    if pred is not None:
        for tau in range(pred.horizon + 1):
            grid = pred.grids[tau]
            flat = grid.ravel()
            order = (-flat).argsort(kind="stable")[:top_k]
            ny = grid.shape[1]
            for idx in order.tolist():
                p = float(flat[idx])
                if p <= 1e-9:
                    break
                cells.append([tau, idx // ny, idx % ny, p])
    plan_obj = session.plan_obj
    waypoints = [[wp.t, wp.pos[0], wp.pos[1], wp.pos[2], wp.p_coll]
                 for wp in plan_obj.waypoints] if plan_obj else []
    cost = plan_obj.total_cost if plan_obj else None
    if cost is not None and not math.isfinite(cost):
        cost = None   # evasive fallback carries no meaningful cost
    return {
        "v": PROTOCOL_VERSION,
        "type": "state_update",
        "t": session.sim_time(),
        "step": session.step_count,
        "human_cell": list(session.human_cell),
        "robot_pos": [session.state.px, session.state.py, session.state.pz],
        "robot_ref": list(plan_obj.reference_at(
            session.sim_time() - session.plan_t0)[0]) if plan_obj else None,
        "belief": {
            "betas": [float(b) for b in belief.betas],
            "probs": [float(p) for p in belief.beta_marginal()],
            "goal_probs": goal_probs,
            "mean_beta": belief.mean_beta,
        },
        "occupancy": {"dt": pred.dt if pred else None, "cells": cells},
        "plan": {
            "cost": cost,
            "reached_goal": bool(plan_obj.reached_goal) if plan_obj else False,
            "waypoints": waypoints,
        },
        "metrics": {
            "min_ground_distance": session.min_ground_distance,
            "sim_time": session.sim_time(),
            "completed": session.completed,
            "completion_time": (session.completion_time
                                if session.completed else None),
            "collision": session.collision_occurred,
        },
    }
