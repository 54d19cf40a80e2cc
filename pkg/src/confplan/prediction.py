"""Forward occupancy forecasts of the human over a planning horizon.

Starting from the current cell, the noisy-rational policy is pushed through
the deterministic grid dynamics one step at a time:

    P(x') = sum_u  1{x' = step(x, u)} P(u | x; beta, goal) P(x)

Conditional forecasts for each (beta, goal) hypothesis are mixed with the
current belief weights to form the forecast the planner integrates over.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .confidence import ConfidenceBelief
from .gridworld import ACTIONS, ACTION_VECTORS, Arena, Cell
from .human_model import HumanModel

# Cells carrying less than this mass are dropped (and the grid renormalized)
# to keep long-horizon supports small; far below any planning threshold.
MASS_TRUNCATION = 1e-9


@dataclass(frozen=True)
class OccupancyPrediction:
    """Per-step probability grids over human cells.

    grids has shape (horizon + 1, cols, rows), indexed [tau, ix, iy];
    grids[0] is a point mass at the cell the forecast was issued from, and
    dt is the wall-clock seconds between consecutive grids.
    """

    arena: Arena
    grids: np.ndarray
    dt: float

    @property
    def horizon(self) -> int:
        return self.grids.shape[0] - 1

    def grid_at(self, tau: int) -> np.ndarray:
        """Grid at step tau; beyond the horizon the last grid persists."""
        if tau < 0:
            raise ValueError("tau must be non-negative")
        return self.grids[min(tau, self.horizon)]

    def support_above(self, tau: int, threshold: float) -> set[Cell]:
        """Cells with mass strictly above ``threshold`` at step tau."""
        if not 0 <= tau <= self.horizon:
            raise ValueError(f"tau {tau} outside horizon {self.horizon}")
        xs, ys = np.nonzero(self.grids[tau] > threshold)
        return {(int(a), int(b)) for a, b in zip(xs, ys)}


def _advance(grid_b: np.ndarray, policy: np.ndarray,
             truncation: float) -> np.ndarray:
    """One pushforward step for a batch of per-beta grids (B, nx, ny)."""
    nx, ny = grid_b.shape[1], grid_b.shape[2]
    out = np.zeros_like(grid_b)
    for a, name in enumerate(ACTIONS):
        dx, dy = ACTION_VECTORS[name]
        flow = grid_b * policy[:, a]
        sx = slice(max(dx, 0), nx + min(dx, 0))
        tx = slice(max(-dx, 0), nx + min(-dx, 0))
        sy = slice(max(dy, 0), ny + min(dy, 0))
        ty = slice(max(-dy, 0), ny + min(-dy, 0))
        out[:, sx, sy] += flow[:, tx, ty]
    if truncation > 0.0:
        out[out < truncation] = 0.0
    out /= out.sum(axis=(1, 2), keepdims=True)
    return out


def conditional_grids(model: HumanModel, start: Cell, beta_values: np.ndarray,
                      goal: Cell, n_steps: int,
                      truncation: float = MASS_TRUNCATION) -> np.ndarray:
    """Per-beta occupancy chains, shape (B, n_steps + 1, cols, rows)."""
    if not model.arena.contains(start):
        raise ValueError(f"start {start} outside arena")
    betas = np.atleast_1d(np.asarray(beta_values, dtype=float))
    nx, ny = model.arena.cols, model.arena.rows
    policy = model.policy_stack(betas, goal)
    seq = np.zeros((len(betas), n_steps + 1, nx, ny))
    seq[:, 0, start[0], start[1]] = 1.0
    for k in range(n_steps):
        seq[:, k + 1] = _advance(seq[:, k], policy, truncation)
    return seq


def _resample_steps(seq: np.ndarray, horizon: int, substeps: int,
                    speed_scale: float) -> np.ndarray:
    """Sample the unit-step chain at tau * substeps * speed_scale.

    Fractional indices interpolate linearly between neighboring chain steps,
    which keeps each sampled grid a valid distribution.
    """
    n_max = seq.shape[1] - 1
    out = np.empty((seq.shape[0], horizon + 1) + seq.shape[2:])
    for tau in range(horizon + 1):
        c = tau * substeps * speed_scale
        k = min(int(math.floor(c + 1e-9)), n_max)
        frac = c - k
        if frac <= 1e-9 or k >= n_max:
            out[:, tau] = seq[:, k]
        else:
            out[:, tau] = (1.0 - frac) * seq[:, k] + frac * seq[:, k + 1]
    return out


def propagate_conditional(start: Cell, beta: float, goal: Cell, horizon: int,
                          model: HumanModel, dt: float | None = None,
                          substeps: int = 1, speed_scale: float = 1.0,
                          truncation: float = MASS_TRUNCATION) -> OccupancyPrediction:
    """Occupancy forecast under a single (beta, goal) hypothesis.

    Each of the ``horizon`` forecast steps advances the human by
    ``substeps * speed_scale`` grid steps (fractional amounts interpolate).
    """
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    n_steps = int(math.ceil(horizon * substeps * speed_scale - 1e-9))
    seq = conditional_grids(model, start, np.array([beta]), goal,
                            max(n_steps, 0), truncation)
    grids = _resample_steps(seq, horizon, substeps, speed_scale)[0]
    if dt is None:
        dt = model.arena.cell_size / model.speed * substeps
    return OccupancyPrediction(arena=model.arena, grids=grids, dt=dt)


def propagate(start: Cell, belief: ConfidenceBelief, model: HumanModel,
              horizon: int, dt: float | None = None, goal: Cell | None = None,
              mode: str = "mixture", substeps: int = 1,
              speed_scale: float = 1.0,
              truncation: float = MASS_TRUNCATION) -> OccupancyPrediction:
    """Belief-weighted occupancy forecast.

    Joint beliefs mix over (beta, goal) pairs; beta-only beliefs use
    ``goal`` (or the model's single goal).  mode="map" forecasts under the
    highest-probability hypothesis instead of marginalizing.
    """
    if mode not in ("mixture", "map"):
        raise ValueError("mode must be 'mixture' or 'map'")
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    if belief.joint:
        if len(model.goals) != belief.table.shape[1]:
            raise ValueError("belief goal axis must match model goals")
        weights = belief.table
        goals = model.goals
    else:
        if goal is None:
            if len(model.goals) != 1:
                raise ValueError("beta-only belief over a multi-goal model "
                                 "needs an explicit goal")
            goal = model.goals[0]
        weights = belief.table[:, None]
        goals = (goal,)

    if mode == "map":
        flat = int(np.argmax(weights))
        bi, gj = divmod(flat, weights.shape[1])
        return propagate_conditional(start, float(belief.betas[bi]), goals[gj],
                                     horizon, model, dt=dt, substeps=substeps,
                                     speed_scale=speed_scale,
                                     truncation=truncation)

    n_steps = int(math.ceil(horizon * substeps * speed_scale - 1e-9))
    nx, ny = model.arena.cols, model.arena.rows
    grids = np.zeros((horizon + 1, nx, ny))
    for j, g in enumerate(goals):
        w = weights[:, j]
        if w.sum() <= 0.0:
            continue
        seq = conditional_grids(model, start, belief.betas, g,
                                max(n_steps, 0), truncation)
        sampled = _resample_steps(seq, horizon, substeps, speed_scale)
        grids += np.tensordot(w, sampled, axes=(0, 0))
    grids /= grids.sum(axis=(1, 2), keepdims=True)
    if dt is None:
        dt = model.arena.cell_size / model.speed * substeps
    return OccupancyPrediction(arena=model.arena, grids=grids, dt=dt)


def write_occupancy(pred: OccupancyPrediction, path) -> None:
    """Sparse text dump: header with (T, dt, rows, cols), then one
    ``tau,row,col,prob`` record per occupied cell (row = iy, col = ix)."""
    with open(path, "w") as f:
        f.write("T,dt,rows,cols\n")
        f.write(f"{pred.horizon},{float(pred.dt)!r},"
                f"{pred.arena.rows},{pred.arena.cols}\n")
        f.write("tau,row,col,prob\n")
        for tau in range(pred.horizon + 1):
            xs, ys = np.nonzero(pred.grids[tau])
            for ix, iy in zip(xs.tolist(), ys.tolist()):
                f.write(f"{tau},{iy},{ix},{float(pred.grids[tau, ix, iy])!r}\n")


def read_occupancy(path, arena: Arena | None = None) -> OccupancyPrediction:
    """Inverse of write_occupancy (bit-exact for finite probabilities)."""
    with open(path) as f:
        header = f.readline().strip()
        if header != "T,dt,rows,cols":
            raise ValueError(f"bad occupancy header {header!r}")
        t_s, dt_s, rows_s, cols_s = f.readline().strip().split(",")
        horizon, dt = int(t_s), float(dt_s)
        rows, cols = int(rows_s), int(cols_s)
        if f.readline().strip() != "tau,row,col,prob":
            raise ValueError("bad occupancy record header")
        if arena is None:
            if rows != cols:
                raise ValueError("cannot infer a square arena; pass one")
            arena = Arena(side_length=cols * 0.1524, cell_size=0.1524)
        grids = np.zeros((horizon + 1, cols, rows))
        for line in f:
            line = line.strip()
            if not line:
                continue
            tau_s, row_s, col_s, p_s = line.split(",")
            grids[int(tau_s), int(col_s), int(row_s)] = float(p_s)
    return OccupancyPrediction(arena=arena, grids=grids, dt=dt)
