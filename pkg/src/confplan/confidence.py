"""Bayesian tracking of how well the human model explains observed motion.

A discrete belief over candidate beta values (optionally jointly over beta
and the goal index) is updated from each observed human action:

    posterior(beta) ∝ P(u | x; beta, goal) * prior(beta)

Between measurement updates a uniform-smoothing time update mixes a small
amount of mass toward uniform, so the belief slowly forgets old evidence and
beta behaves as a hidden state rather than a fixed parameter.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .gridworld import Cell
from .human_model import HumanModel


def default_beta_grid(low: float = 0.05, high: float = 10.0,
                      num: int = 10) -> np.ndarray:
    """Log-spaced beta hypotheses, low/high matching the fixed baselines."""
    if num < 2:
        raise ValueError("need at least two beta values")
    if not 0 < low < high:
        raise ValueError("need 0 < low < high")
    return np.geomspace(low, high, num)


@dataclass(frozen=True)
class ConfidenceBelief:
    """Immutable probability table over beta (1-D) or (beta, goal) (2-D).

    Updates return new snapshots; the table always sums to 1.
    """

    betas: np.ndarray
    table: np.ndarray
    smoothing_eps: float = 0.02

    def __post_init__(self):
        betas = np.asarray(self.betas, dtype=float)
        table = np.asarray(self.table, dtype=float)
        object.__setattr__(self, "betas", betas)
        object.__setattr__(self, "table", table)
        if table.shape[0] != betas.shape[0]:
            raise ValueError("table first axis must match betas")
        if table.ndim not in (1, 2):
            raise ValueError("table must be 1-D (beta) or 2-D (beta, goal)")
        if not 0.0 <= self.smoothing_eps <= 1.0:
            raise ValueError("smoothing_eps must be in [0, 1]")

    @classmethod
    def uniform(cls, betas: np.ndarray, n_goals: int | None = None,
                smoothing_eps: float = 0.02) -> "ConfidenceBelief":
        betas = np.asarray(betas, dtype=float)
        if n_goals is None:
            table = np.full(len(betas), 1.0 / len(betas))
        else:
            table = np.full((len(betas), n_goals), 1.0 / (len(betas) * n_goals))
        return cls(betas=betas, table=table, smoothing_eps=smoothing_eps)

    @classmethod
    def fixed(cls, beta: float) -> "ConfidenceBelief":
        """Degenerate single-hypothesis belief for fixed-beta baselines."""
        return cls(betas=np.array([float(beta)]), table=np.array([1.0]),
                   smoothing_eps=0.0)

    @property
    def joint(self) -> bool:
        return self.table.ndim == 2

    @property
    def mean_beta(self) -> float:
        return float(self.beta_marginal() @ self.betas)

    def beta_marginal(self) -> np.ndarray:
        return self.table.sum(axis=1) if self.joint else self.table.copy()

    def goal_marginal(self) -> np.ndarray:
        if not self.joint:
            raise ValueError("goal marginal requires a joint table")
        return self.table.sum(axis=0)

    def marginals(self) -> tuple[np.ndarray, np.ndarray]:
        """Normalized (beta, goal) marginals of a joint table."""
        b = self.beta_marginal()
        g = self.goal_marginal()
        return b / b.sum(), g / g.sum()

    def _likelihoods(self, cell: Cell, action: str, model: HumanModel,
                     goal: Cell | None = None) -> np.ndarray:
        goals = (goal,) if goal is not None else model.goals
        like = np.empty((len(self.betas), len(goals)))
        for j, g in enumerate(goals):
            for i, beta in enumerate(self.betas):
                like[i, j] = model.action_likelihood(cell, action, beta, g)
        return like

    def measurement_update(self, cell: Cell, action: str,
                           model: HumanModel) -> "ConfidenceBelief":
        """Bayes update from one observed action.

        Joint tables update per (beta, goal) entry; 1-D tables require a
        single-goal model (use bootstrapped_update to pin another goal).
        """
        if self.joint:
            if len(model.goals) != self.table.shape[1]:
                raise ValueError("joint table width must match model goals")
            like = self._likelihoods(cell, action, model)
        else:
            if len(model.goals) != 1:
                raise ValueError(
                    "beta-only update needs a single-goal model; "
                    "use bootstrapped_update with an explicit goal estimate")
            like = self._likelihoods(cell, action, model)[:, 0]
        post = like * self.table
        total = post.sum()
        if total <= 0.0:
            raise ValueError("degenerate likelihood")
        return replace(self, table=post / total)

    def bootstrapped_update(self, goal_estimate: Cell, cell: Cell, action: str,
                            model: HumanModel) -> "ConfidenceBelief":
        """Beta-only Bayes update with the goal pinned to a running estimate."""
        if self.joint:
            raise ValueError("bootstrapped update applies to beta-only tables")
        like = self._likelihoods(cell, action, model, goal=goal_estimate)[:, 0]
        post = like * self.table
        total = post.sum()
        if total <= 0.0:
            raise ValueError("degenerate likelihood")
        return replace(self, table=post / total)

    def time_update(self) -> "ConfidenceBelief":
        """Mix smoothing_eps of mass toward uniform (hidden-state smoothing)."""
        eps = self.smoothing_eps
        uniform = np.full_like(self.table, 1.0 / self.table.size)
        mixed = (1.0 - eps) * self.table + eps * uniform
        return replace(self, table=mixed / mixed.sum())

    def observe(self, cell: Cell, action: str, model: HumanModel,
                goal_estimate: Cell | None = None) -> "ConfidenceBelief":
        """One observation step: measurement update, then time update."""
        if goal_estimate is not None and not self.joint:
            b = self.bootstrapped_update(goal_estimate, cell, action, model)
        else:
            b = self.measurement_update(cell, action, model)
        return b.time_update()


@dataclass(frozen=True)
class SpeedEstimate:
    """Windowed running mean of instantaneous human speeds."""

    value: float
    window: int = 10
    samples: tuple[float, ...] = ()

    def __post_init__(self):
        if self.value <= 0:
            raise ValueError("speed must be positive")
        if self.window < 1:
            raise ValueError("window must be >= 1")

    def update(self, displacement: float, dt: float) -> "SpeedEstimate":
        if dt <= 0:
            raise ValueError("dt must be positive")
        samples = (self.samples + (displacement / dt,))[-self.window:]
        mean = sum(samples) / len(samples)
        # Guard the positivity invariant when the human stands still.
        return replace(self, value=max(mean, 1e-6), samples=samples)


def update_speed(est: SpeedEstimate, displacement: float,
                 dt: float) -> SpeedEstimate:
    return est.update(displacement, dt)


@dataclass(frozen=True)
class GoalEstimator:
    """Running maximum-likelihood goal estimate for bootstrapped inference.

    Keeps an exponentially decayed log-likelihood score per candidate goal,
    evaluated at a fixed reference beta, and reports the argmax (lowest index
    on ties).
    """

    scores: tuple[float, ...]
    decay: float = 0.9
    ref_beta: float = 1.0

    @classmethod
    def for_model(cls, model: HumanModel, decay: float = 0.9,
                  ref_beta: float = 1.0) -> "GoalEstimator":
        return cls(scores=(0.0,) * len(model.goals), decay=decay,
                   ref_beta=ref_beta)

    def update(self, cell: Cell, action: str, model: HumanModel) -> "GoalEstimator":
        new = []
        for g, s in zip(model.goals, self.scores):
            p = model.action_likelihood(cell, action, self.ref_beta, g)
            new.append(self.decay * s + np.log(max(p, 1e-300)))
        return replace(self, scores=tuple(new))

    @property
    def best_index(self) -> int:
        return int(np.argmax(self.scores))

    def best_goal(self, model: HumanModel) -> Cell:
        return model.goals[self.best_index]
