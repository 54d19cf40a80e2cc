"""Synthetic human walking trajectories and the (t, x, y) CSV format.

Stand-ins for recorded motion-capture walks: straight goal-directed paths, a
detour around a floor obstacle the robot does not know about, and a triangle
visiting two known goals before returning to the (unmodeled) start.  All
generators emit constant-speed samples at a configurable rate and are
deterministic given their seed.
"""

from __future__ import annotations

import math

import numpy as np

KINDS = ("direct", "spill_detour", "triangle")


def _resample_polyline(points: np.ndarray, speed: float,
                       rate: float) -> np.ndarray:
    """Constant-speed (t, x, y) samples along a polyline, endpoint included."""
    seg = np.diff(points, axis=0)
    seg_len = np.hypot(seg[:, 0], seg[:, 1])
    cum = np.concatenate([[0.0], np.cumsum(seg_len)])
    total = cum[-1]
    if total <= 0.0:
        # Degenerate path: the walker stands still.
        x, y = points[0]
        return np.array([[0.0, x, y], [1.0 / rate, x, y]])
    duration = total / speed
    n = max(int(math.floor(duration * rate)), 1)
    ts = np.arange(n + 1) / rate
    ts[-1] = min(ts[-1], duration)
    if duration - ts[-1] > 1e-9:
        ts = np.append(ts, duration)
    dist = np.clip(ts * speed, 0.0, total)
    xs = np.interp(dist, cum, points[:, 0])
    ys = np.interp(dist, cum, points[:, 1])
    return np.column_stack([ts, xs, ys])


def _jitter_point(point, rng: np.random.Generator, magnitude: float):
    p = np.asarray(point, dtype=float)
    if magnitude > 0.0:
        p = p + rng.uniform(-magnitude, magnitude, size=2)
    return p


def generate_trajectory(kind: str, params: dict, seed: int = 0) -> np.ndarray:
    """Samples of shape (N, 3) with columns (t seconds, x meters, y meters).

    Common params: start, speed (default 1.0 m/s), rate (default 100 Hz),
    jitter (uniform perturbation of endpoints, default 0).  Per kind:
      direct:       goal
      spill_detour: goal, spill_center, spill_radius, margin (default 0.08),
                    side (+1 counterclockwise / -1 clockwise detour)
      triangle:     goal1, goal2 (start -> goal1 -> goal2 -> start)
    """
    if kind not in KINDS:
        raise ValueError(f"unknown trajectory kind {kind!r}")
    rng = np.random.default_rng(seed)
    speed = float(params.get("speed", 1.0))
    rate = float(params.get("rate", 100.0))
    jitter = float(params.get("jitter", 0.0))
    start = _jitter_point(params["start"], rng, jitter)

    if kind == "direct":
        goal = _jitter_point(params["goal"], rng, jitter)
        points = np.array([start, goal])
    elif kind == "triangle":
        g1 = _jitter_point(params["goal1"], rng, jitter)
        g2 = _jitter_point(params["goal2"], rng, jitter)
        points = np.array([start, g1, g2, start])
    else:
        goal = _jitter_point(params["goal"], rng, jitter)
        center = np.asarray(params["spill_center"], dtype=float)
        radius = float(params["spill_radius"])
        margin = float(params.get("margin", 0.08))
        side = int(params.get("side", 1))
        points = _detour_points(start, goal, center, radius + margin, side)

    return _resample_polyline(points, speed, rate)


def _detour_points(start, goal, center, clearance: float,
                   side: int) -> np.ndarray:
    """Polyline from start to goal skirting a disk at ``clearance`` radius.

    Walks straight to the disk boundary, arcs around it on the chosen side,
    and continues straight to the goal; collapses to the straight segment
    when the disk does not block it.
    """
    start = np.asarray(start, dtype=float)
    goal = np.asarray(goal, dtype=float)
    d = goal - start
    length = float(np.hypot(*d))
    if length <= 0:
        raise ValueError("start and goal coincide")
    u = d / length

    # Segment/circle intersection: |start + s*u - center| = clearance.
    f = start - center
    b = float(f @ u)
    disc = b * b - float(f @ f) + clearance ** 2
    if disc <= 0:
        return np.array([start, goal])
    root = math.sqrt(disc)
    s1, s2 = -b - root, -b + root
    if s2 <= 0 or s1 >= length:
        return np.array([start, goal])
    s1, s2 = max(s1, 0.0), min(s2, length)

    p1 = start + s1 * u
    p2 = start + s2 * u
    a1 = math.atan2(p1[1] - center[1], p1[0] - center[0])
    a2 = math.atan2(p2[1] - center[1], p2[0] - center[0])
    if side >= 0:
        while a2 <= a1:
            a2 += 2 * math.pi
    else:
        while a2 >= a1:
            a2 -= 2 * math.pi
    n_arc = max(int(math.ceil(abs(a2 - a1) / 0.25)), 2)
    angles = np.linspace(a1, a2, n_arc + 1)
    arc = center + clearance * np.column_stack([np.cos(angles), np.sin(angles)])
    pts = [start]
    pts.extend(arc)
    pts.append(goal)
    return np.array(pts)


def write_trajectory_csv(samples: np.ndarray, path) -> None:
    with open(path, "w") as f:
        f.write("t,x,y\n")
        for t, x, y in samples:
            f.write(f"{float(t)!r},{float(x)!r},{float(y)!r}\n")


def read_trajectory_csv(path) -> np.ndarray:
    """Reads (t, x, y) rows at any sample rate; header optional."""
    rows = []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("t,"):
                continue
            t_s, x_s, y_s = line.split(",")
            rows.append((float(t_s), float(x_s), float(y_s)))
    if not rows:
        raise ValueError(f"no samples in {path}")
    out = np.array(rows)
    if np.any(np.diff(out[:, 0]) < 0):
        raise ValueError("timestamps must be non-decreasing")
    return out


def position_at(samples: np.ndarray, t: float) -> tuple[float, float]:
    """Piecewise-linear position at time t, held constant past the ends."""
    ts = samples[:, 0]
    x = float(np.interp(t, ts, samples[:, 1]))
    y = float(np.interp(t, ts, samples[:, 2]))
    return (x, y)
