"""Goal-directed utility model of the human and its noisy-rational policy.

The human is modeled as preferring actions with high state-action value

    Q(x, u; g) = -(|u| + |x + u - g|)        (cell units)

i.e. the cost of the move plus the remaining straight-line distance to the
goal g.  Actions are chosen with probability proportional to
exp(beta * Q), where beta >= 0 scales how strongly the observed behavior is
expected to follow the model: beta = 0 yields uniform actions, large beta
concentrates on the argmax.  The softmax is evaluated with a max shift so
it stays finite for beta up to at least 1e3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gridworld import (
    ACTIONS,
    ACTION_NORMS,
    ACTION_VECTORS,
    Arena,
    Cell,
    feasible_actions,
)


def boltzmann_probs(q_values: np.ndarray, beta: float) -> np.ndarray:
    """Softmax of beta * q_values with a max shift for numerical stability."""
    if beta < 0:
        raise ValueError("beta must be non-negative")
    logits = beta * np.asarray(q_values, dtype=float)
    logits -= logits.max()
    w = np.exp(logits)
    return w / w.sum()


@dataclass(frozen=True)
class HumanModel:
    """Grid-walking human heading for one of several candidate goals.

    goals are cells; speed is the walking-speed parameter in m/s (a running
    estimate may be written back by the simulator).  q_scale rescales the
    cell-unit Q values, e.g. to metric units.
    """

    arena: Arena
    goals: tuple[Cell, ...]
    speed: float = 1.0
    q_scale: float = 1.0

    def __post_init__(self):
        if len(self.goals) < 1:
            raise ValueError("need at least one goal")
        for g in self.goals:
            if not self.arena.contains(g):
                raise ValueError(f"goal {g} outside arena")
        if self.speed <= 0:
            raise ValueError("speed must be positive")

    @classmethod
    def from_metric(cls, arena: Arena, goals_m, speed: float = 1.0,
                    q_scale: float = 1.0) -> "HumanModel":
        """Build from goal positions in meters, snapped to their cells."""
        cells = tuple(arena.snap(float(x), float(y)) for x, y in goals_m)
        return cls(arena=arena, goals=cells, speed=speed, q_scale=q_scale)

    def q_value(self, cell: Cell, action: str, goal: Cell) -> float:
        if action not in feasible_actions(self.arena, cell):
            raise ValueError(f"infeasible action {action} at {cell}")
        dx, dy = ACTION_VECTORS[action]
        rem = math.hypot(cell[0] + dx - goal[0], cell[1] + dy - goal[1])
        return -self.q_scale * (ACTION_NORMS[action] + rem)

    def action_likelihood(self, cell: Cell, action: str, beta: float,
                          goal: Cell) -> float:
        dist = self.action_distribution(cell, beta, goal)
        if action not in dist:
            raise ValueError(f"infeasible action {action} at {cell}")
        return dist[action]

    def action_distribution(self, cell: Cell, beta: float,
                            goal: Cell) -> dict[str, float]:
        """Probability of each feasible action at ``cell`` under (beta, goal)."""
        acts = feasible_actions(self.arena, cell)
        qs = np.array([self.q_value(cell, a, goal) for a in acts])
        probs = boltzmann_probs(qs, beta)
        return dict(zip(acts, probs.tolist()))

    def q_stack(self, goal: Cell) -> np.ndarray:
        """Q values for every (action, cell), shape (9, cols, rows).

        Infeasible (off-arena) moves are -inf.
        """
        nx, ny = self.arena.cols, self.arena.rows
        ix = np.arange(nx, dtype=float)[:, None]
        iy = np.arange(ny, dtype=float)[None, :]
        out = np.full((len(ACTIONS), nx, ny), -np.inf)
        for a, name in enumerate(ACTIONS):
            dx, dy = ACTION_VECTORS[name]
            tx, ty = ix + dx, iy + dy
            valid = (tx >= 0) & (tx < nx) & (ty >= 0) & (ty < ny)
            rem = np.hypot(tx - goal[0], ty - goal[1])
            q = -self.q_scale * (ACTION_NORMS[name] + rem)
            out[a] = np.where(valid, q, -np.inf)
        return out

    def policy_stack(self, betas: np.ndarray, goal: Cell) -> np.ndarray:
        """Vectorized action distributions for a batch of beta values.

        Returns shape (len(betas), 9, cols, rows); entry [b, a, ix, iy] is the
        probability of action a at cell (ix, iy) under betas[b].  Infeasible
        actions carry probability 0.  Agrees with action_distribution.
        """
        betas = np.asarray(betas, dtype=float)
        if np.any(betas < 0):
            raise ValueError("beta must be non-negative")
        q = self.q_stack(goal)
        valid = np.isfinite(q)
        # beta * (-inf) is nan at beta=0; build logits from finite Q only.
        q_fin = np.where(valid, q, 0.0)
        logits = betas[:, None, None, None] * q_fin[None]
        logits = np.where(valid[None], logits, -np.inf)
        logits -= logits.max(axis=1, keepdims=True)
        w = np.exp(logits)
        return w / w.sum(axis=1, keepdims=True)


def goal_index(model: HumanModel, goal: Cell) -> int:
    try:
        return model.goals.index(goal)
    except ValueError:
        raise ValueError(f"goal {goal} not among model goals") from None
