"""Tracking-bound-inflated collision sets and collision-probability bounds.

The physical robot stays within an axis-aligned tracking box around its
planned position, so any human within the Minkowski-inflated rectangle

    (l + Ex) x (l + Ey)   centered at the planned (px, py)

could collide with it.  The occupancy mass inside that rectangle upper-bounds
the per-step collision probability; a full trajectory is scored by the
maximum of its per-step bounds, which lower-bounds (and in practice tracks)
the true trajectory-wide collision probability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gridworld import Arena, KeepOutSpec
from .prediction import OccupancyPrediction

# Slack for cell-center membership tests, far below any grid resolution,
# so exact-boundary centers count as inside on both evaluation paths.
_EDGE_EPS = 1e-9


@dataclass(frozen=True)
class TrackingBound:
    """Axis-aligned tracking error box, stored as full box dimensions.

    The tracked robot stays within +/- ex/2 (ey/2, ez/2) of the plan.
    """

    ex: float = 0.1
    ey: float = 0.1
    ez: float = 0.1

    def __post_init__(self):
        if min(self.ex, self.ey, self.ez) < 0:
            raise ValueError("bound dimensions must be non-negative")


@dataclass(frozen=True)
class CollisionSet:
    """Ground-plane rectangle of human positions in potential collision."""

    cx: float
    cy: float
    half_x: float
    half_y: float

    def contains(self, x: float, y: float) -> bool:
        """Closed membership with a tiny slack for exact-boundary centers."""
        return (abs(x - self.cx) <= self.half_x + _EDGE_EPS
                and abs(y - self.cy) <= self.half_y + _EDGE_EPS)


def collision_set(x_r, keepout: KeepOutSpec,
                  bound: TrackingBound) -> CollisionSet:
    """Inflated rectangle (l + Ex) x (l + Ey) centered at the planned
    position; altitude-independent."""
    l = keepout.human_box_side
    return CollisionSet(cx=float(x_r[0]), cy=float(x_r[1]),
                        half_x=(l + bound.ex) / 2.0,
                        half_y=(l + bound.ey) / 2.0)


def _cell_window(arena: Arena, rect: CollisionSet) -> tuple[int, int, int, int]:
    """Index ranges of cells whose centers lie inside the rectangle."""
    c = arena.cell_size
    x0 = math.ceil((rect.cx - rect.half_x) / c - 0.5 - _EDGE_EPS)
    x1 = math.floor((rect.cx + rect.half_x) / c - 0.5 + _EDGE_EPS)
    y0 = math.ceil((rect.cy - rect.half_y) / c - 0.5 - _EDGE_EPS)
    y1 = math.floor((rect.cy + rect.half_y) / c - 0.5 + _EDGE_EPS)
    return (max(x0, 0), min(x1, arena.cols - 1),
            max(y0, 0), min(y1, arena.rows - 1))


def marginal_collision_prob(pred: OccupancyPrediction, tau: int, x_r,
                            keepout: KeepOutSpec,
                            bound: TrackingBound) -> float:
    """Occupancy mass whose cell centers fall in the inflated rectangle."""
    if not 0 <= tau <= pred.horizon:
        raise ValueError(f"tau {tau} outside horizon {pred.horizon}")
    rect = collision_set(x_r, keepout, bound)
    x0, x1, y0, y1 = _cell_window(pred.arena, rect)
    if x0 > x1 or y0 > y1:
        return 0.0
    return float(pred.grids[tau, x0:x1 + 1, y0:y1 + 1].sum())


def trajectory_collision_prob(traj, pred: OccupancyPrediction,
                              keepout: KeepOutSpec,
                              bound: TrackingBound) -> float:
    """Max per-waypoint marginal along a planned trajectory.

    Waypoint k is scored against the step-k grid; trajectories longer than
    the forecast horizon are rejected.
    """
    if len(traj.waypoints) - 1 > pred.horizon:
        raise ValueError("horizon mismatch: trajectory outruns the forecast")
    worst = 0.0
    for tau, wp in enumerate(traj.waypoints):
        worst = max(worst, marginal_collision_prob(pred, tau, wp.pos,
                                                   keepout, bound))
    return worst


def marginal_grid(pred: OccupancyPrediction, tau: int, keepout: KeepOutSpec,
                  bound: TrackingBound) -> np.ndarray:
    """Marginal collision probability for a robot at every cell center.

    Shape (cols, rows); entry [ix, iy] equals marginal_collision_prob for a
    robot planned at the center of cell (ix, iy).  Window sums accumulate
    shifted copies, which matches the sliced sum to float rounding.
    """
    arena = pred.arena
    c = arena.cell_size
    # For a robot at a cell center the window is a constant symmetric span.
    wx = math.floor(((keepout.human_box_side + bound.ex) / 2.0) / c + _EDGE_EPS)
    wy = math.floor(((keepout.human_box_side + bound.ey) / 2.0) / c + _EDGE_EPS)
    grid = pred.grid_at(tau)
    nx, ny = grid.shape
    out = np.zeros_like(grid)
    for dx in range(-wx, wx + 1):
        sx = slice(max(-dx, 0), nx + min(-dx, 0))
        tx = slice(max(dx, 0), nx + min(dx, 0))
        for dy in range(-wy, wy + 1):
            sy = slice(max(-dy, 0), ny + min(-dy, 0))
            ty = slice(max(dy, 0), ny + min(dy, 0))
            out[sx, sy] += grid[tx, ty]
    return out
