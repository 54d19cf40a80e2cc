#!/usr/bin/env python3
"""Record a live-session message transcript for the frontend test fixtures.

Replays the spill-detour walk through the live session engine and writes the
state_update stream (plus the config message) as JSON, together with the
human-step indices spent on the detour arc.  The frontend tests replay this
transcript through the view model and check that the confidence bars shift
toward low values during the detour.

Usage: python scripts/record_transcript.py [out.json]
"""

import json
import math
import sys
from pathlib import Path

from confplan import wire
from confplan.scenario import load_scenario
from confplan.simulation import SimSession
from confplan.trajectories import position_at

ROOT = Path(__file__).resolve().parent.parent


def main() -> None:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else \
        ROOT / "frontend" / "test" / "fixtures" / "spill_transcript.json"
    cfg = load_scenario(ROOT / "scenarios" / "spill_trace.yaml")

    replay = SimSession(cfg)
    tc = cfg.human.trajectory
    arc_r = tc.spill_radius + tc.margin + 0.05

    moves, detour_steps = [], []
    cell = replay.human_cell
    k = 1
    while k * replay.human_dt <= 14.0:
        xy = position_at(replay.trajectory, k * replay.human_dt)
        new = replay.arena.snap(*xy, prev=cell)
        dx = min(max(new[0] - cell[0], -1), 1)
        dy = min(max(new[1] - cell[1], -1), 1)
        moves.append((dx, dy))
        cell = (cell[0] + dx, cell[1] + dy)
        if math.hypot(xy[0] - tc.spill_center[0],
                      xy[1] - tc.spill_center[1]) <= arc_r:
            detour_steps.append(k)
        k += 1

    live = SimSession(cfg, live=True)
    messages = [wire.config_message(live)]
    for dx, dy in moves:
        live.live_tick(dx, dy)
        messages.append(wire.state_update(live))

    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps({
        "messages": messages,
        "detour_steps": [detour_steps[0], detour_steps[-1]],
    }, sort_keys=True))
    print(f"wrote {out} ({len(messages)} messages, "
          f"detour steps {detour_steps[0]}..{detour_steps[-1]})")


if __name__ == "__main__":
    main()
