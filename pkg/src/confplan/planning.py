"""Time-stamped grid search planner with probabilistic node rejection.

The robot plans over (cell, step) states on the same lattice as the human
grid, moving one cell (or staying) per planning step of duration
dt = cell_size / robot_speed.  Nodes whose inflated-rectangle occupancy mass
exceeds the collision-probability threshold are rejected outright, so every
trajectory the search can return satisfies the per-waypoint bound.

The constrained minimum-cost path (per-step cost |u| + c0) is computed by a
forward pass over the time-expanded lattice; ties resolve to the earliest
arrival step and then the canonical action order, so identical inputs give
identical plans.  Beyond the forecast horizon, the final occupancy grid
persists.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .collision import TrackingBound, marginal_collision_prob, marginal_grid
from .gridworld import ACTIONS, ACTION_VECTORS, Arena, Cell, KeepOutSpec
from .prediction import OccupancyPrediction


class PlanInfeasibleError(Exception):
    """The current state already violates the collision threshold."""


class NoSafePlanError(Exception):
    """No threshold-satisfying trajectory reaches the goal (fallback off)."""


@dataclass(frozen=True)
class PlanConfig:
    goal: tuple[float, float, float]
    p_threshold: float = 0.01
    horizon: int = 20
    robot_speed: float = 0.25
    step_cost: float = 0.5
    dt: float | None = None
    fallback: bool = True

    def __post_init__(self):
        if not 0.0 <= self.p_threshold <= 1.0:
            raise ValueError("p_threshold must be in [0, 1]")
        if self.robot_speed <= 0:
            raise ValueError("robot_speed must be positive")
        if self.dt is not None and self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.horizon < 0:
            raise ValueError("horizon must be >= 0")

    def resolve_dt(self, arena: Arena) -> float:
        return self.dt if self.dt is not None else arena.cell_size / self.robot_speed


@dataclass(frozen=True)
class Waypoint:
    t: float
    pos: tuple[float, float, float]
    control: tuple[float, float, float]   # commanded velocity over the step
    p_coll: float
    cell: Cell


@dataclass(frozen=True)
class PlannedTrajectory:
    waypoints: tuple[Waypoint, ...]
    total_cost: float
    reached_goal: bool
    dt: float

    @property
    def cells(self) -> tuple[Cell, ...]:
        return tuple(wp.cell for wp in self.waypoints)

    def position_at(self, t: float) -> tuple[float, float, float]:
        """Linearly interpolated reference position at relative time t."""
        ref_p, _ = self.reference_at(t)
        return ref_p

    def reference_at(self, t: float) -> tuple[tuple[float, float, float],
                                              tuple[float, float, float]]:
        """Interpolated (position, velocity) reference; holds the last
        waypoint with zero velocity once the plan is consumed."""
        wps = self.waypoints
        if t <= 0 or len(wps) == 1:
            idx, frac = 0, 0.0
        else:
            s = t / self.dt
            idx = min(int(math.floor(s + 1e-9)), len(wps) - 1)
            frac = s - idx
        if idx >= len(wps) - 1:
            return wps[-1].pos, (0.0, 0.0, 0.0)
        a, b = wps[idx].pos, wps[idx + 1].pos
        pos = tuple(pa + (pb - pa) * frac for pa, pb in zip(a, b))
        vel = tuple((pb - pa) / self.dt for pa, pb in zip(a, b))
        return pos, vel


def _safety_masks(pred: OccupancyPrediction, horizon: int,
                  keepout: KeepOutSpec, bound: TrackingBound) -> np.ndarray:
    """Per-(step, cell) marginal collision probabilities, persisted past the
    forecast horizon, shape (horizon + 1, cols, rows)."""
    margs = np.empty((horizon + 1, pred.arena.cols, pred.arena.rows))
    for tau in range(horizon + 1):
        if tau <= pred.horizon:
            margs[tau] = marginal_grid(pred, tau, keepout, bound)
        else:
            margs[tau] = margs[pred.horizon]
    return margs


def plan(x_now, pred: OccupancyPrediction, cfg: PlanConfig,
         keepout: KeepOutSpec, bound: TrackingBound) -> PlannedTrajectory:
    """Minimum-cost safe trajectory from the current planning position.

    x_now is (px, py, pz) in meters, snapped to its lattice cell; altitude is
    held constant.  Raises PlanInfeasibleError when the start itself exceeds
    the threshold, and NoSafePlanError when the goal is unreachable and the
    best-progress fallback is disabled.
    """
    arena = pred.arena
    dt = cfg.resolve_dt(arena)
    start = arena.snap(float(x_now[0]), float(x_now[1]))
    goal_cell = arena.snap(float(cfg.goal[0]), float(cfg.goal[1]))
    altitude = float(x_now[2])
    T = cfg.horizon

    start_marg = marginal_collision_prob(
        pred, 0, arena.cell_center(start), keepout, bound)
    if start_marg > cfg.p_threshold:
        raise PlanInfeasibleError(
            f"infeasible start: marginal {start_marg:.4f} exceeds threshold")

    margs = _safety_masks(pred, T, keepout, bound)
    safe = margs <= cfg.p_threshold
    nx, ny = arena.cols, arena.rows
    step_m = arena.cell_size

    INF = np.inf
    cost = np.full((T + 1, nx, ny), INF)
    parent = np.full((T + 1, nx, ny), -1, dtype=np.int8)
    cost[0, start[0], start[1]] = 0.0

    for tau in range(1, T + 1):
        prev = cost[tau - 1]
        cur = cost[tau]
        for a, name in enumerate(ACTIONS):
            dx, dy = ACTION_VECTORS[name]
            move_cost = math.hypot(dx, dy) * step_m + cfg.step_cost
            sx = slice(max(dx, 0), nx + min(dx, 0))
            tx = slice(max(-dx, 0), nx + min(-dx, 0))
            sy = slice(max(dy, 0), ny + min(dy, 0))
            ty = slice(max(-dy, 0), ny + min(-dy, 0))
            cand = prev[tx, ty] + move_cost
            better = cand < cur[sx, sy]
            cur[sx, sy] = np.where(better, cand, cur[sx, sy])
            pa = parent[tau][sx, sy]
            parent[tau][sx, sy] = np.where(better, a, pa)
        cur[~safe[tau]] = INF
        parent[tau][~safe[tau]] = -1

    arrivals = cost[:, goal_cell[0], goal_cell[1]]
    finite = np.isfinite(arrivals)
    if finite.any():
        best_tau = int(np.flatnonzero(
            arrivals == arrivals[finite].min())[0])
        end, end_tau, reached = goal_cell, best_tau, True
    else:
        if not cfg.fallback:
            raise NoSafePlanError("no safe plan reaches the goal in horizon")
        end, end_tau = _best_progress(cost, goal_cell)
        reached = end == goal_cell

    cells = _reconstruct(parent, end, end_tau)
    waypoints = _to_waypoints(cells, arena, altitude, dt, pred, keepout, bound)
    total = 0.0
    for prev_c, next_c in zip(cells[:-1], cells[1:]):
        total += math.hypot(next_c[0] - prev_c[0],
                            next_c[1] - prev_c[1]) * step_m + cfg.step_cost
    return PlannedTrajectory(waypoints=tuple(waypoints), total_cost=total,
                             reached_goal=reached, dt=dt)


def _best_progress(cost: np.ndarray, goal_cell: Cell) -> tuple[Cell, int]:
    """Reachable (cell, step) with the most progress toward the goal.

    Ties resolve to lower path cost, then earlier step, then cell index.
    """
    T1, nx, ny = cost.shape
    ix = np.arange(nx)[:, None]
    iy = np.arange(ny)[None, :]
    dx, dy = np.abs(ix - goal_cell[0]), np.abs(iy - goal_cell[1])
    lo, hi = np.minimum(dx, dy), np.maximum(dx, dy)
    dist = math.sqrt(2.0) * lo + (hi - lo)

    best = None
    for tau in range(T1):
        finite = np.isfinite(cost[tau])
        if not finite.any():
            continue
        d = np.where(finite, dist, np.inf)
        dmin = d.min()
        c = np.where(d == dmin, cost[tau], np.inf)
        cmin = c.min()
        flat = int(np.flatnonzero((c == cmin).ravel())[0])
        key = (dmin, cmin, tau, flat)
        if best is None or key < best[0]:
            best = (key, (flat // ny, flat % ny), tau)
    assert best is not None, "start node is always reachable"
    return best[1], best[2]


def _reconstruct(parent: np.ndarray, end: Cell, end_tau: int) -> list[Cell]:
    cells = [end]
    cur = end
    for tau in range(end_tau, 0, -1):
        a = int(parent[tau, cur[0], cur[1]])
        assert a >= 0, "broken parent chain"
        dx, dy = ACTION_VECTORS[ACTIONS[a]]
        cur = (cur[0] - dx, cur[1] - dy)
        cells.append(cur)
    cells.reverse()
    return cells


def _to_waypoints(cells: list[Cell], arena: Arena, altitude: float, dt: float,
                  pred: OccupancyPrediction, keepout: KeepOutSpec,
                  bound: TrackingBound) -> list[Waypoint]:
    waypoints = []
    for k, cell in enumerate(cells):
        x, y = arena.cell_center(cell)
        pos = (x, y, altitude)
        if k + 1 < len(cells):
            nx_, ny_ = arena.cell_center(cells[k + 1])
            control = ((nx_ - x) / dt, (ny_ - y) / dt, 0.0)
        else:
            control = (0.0, 0.0, 0.0)
        # Recompute the marginal through the collision module rather than
        # trusting search bookkeeping.
        tau = min(k, pred.horizon)
        p = marginal_collision_prob(pred, tau, pos, keepout, bound)
        waypoints.append(Waypoint(t=k * dt, pos=pos, control=control,
                                  p_coll=p, cell=cell))
    return waypoints


def replan_needed(current_traj: PlannedTrajectory, new_pred: OccupancyPrediction,
                  cfg: PlanConfig, keepout: KeepOutSpec,
                  bound: TrackingBound) -> bool:
    """True iff any remaining waypoint's recomputed marginal now exceeds the
    threshold (the simulator replans on a fixed cadence regardless)."""
    for k, wp in enumerate(current_traj.waypoints):
        tau = min(k, new_pred.horizon)
        p = marginal_collision_prob(new_pred, tau, wp.pos, keepout, bound)
        if p > cfg.p_threshold:
            return True
    return False
