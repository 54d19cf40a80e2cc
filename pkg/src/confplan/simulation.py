"""Closed-loop engine: observe the human, infer confidence, forecast,
plan, and track, while recording safety and efficiency metrics.

Timeline.  The human is observed (snapped to its grid cell) every
``cell_size / speed`` seconds; the tracker runs at ``control_hz``.  One
planning step spans ``substeps`` human steps so that the robot moves one
grid cell per planning step at its slower speed, and the forecast is
regenerated and the plan recomputed on planning-step boundaries.  Metrics
use the continuous (pre-snap) human position against the simulated (not
planned) robot position.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import quadrotor
from .collision import TrackingBound, marginal_collision_prob, marginal_grid
from .confidence import ConfidenceBelief, GoalEstimator, SpeedEstimate, \
    default_beta_grid
from .gridworld import ACTIONS, ACTION_VECTORS, Cell, infer_action
from .human_model import HumanModel
from .planning import PlanConfig, PlanInfeasibleError, PlannedTrajectory, \
    Waypoint, plan, replan_needed
from .prediction import OccupancyPrediction, propagate
from .quadrotor import ControlConfig, QuadState, project, step_quad, track
from .scenario import MethodConfig, ScenarioConfig
from .trajectories import generate_trajectory, position_at, read_trajectory_csv


@dataclass
class CycleLog:
    """One planning cycle: belief snapshot and plan summary."""

    t: float
    mean_beta: float
    beta_marginal: tuple[float, ...]
    goal_marginal: tuple[float, ...] | None
    plan_cost: float
    reached_goal: bool
    plan_unsafe: bool      # previous plan exceeded the threshold when rechecked
    plan_failure: bool     # current state itself violated the threshold


@dataclass
class RunMetrics:
    min_ground_distance: float
    completion_time: float
    timed_out: bool
    collision_occurred: bool
    plan_failures: int
    evasive_cycles: int
    certificate_clean: bool
    tracking_max_dev: tuple[float, float, float]
    tracking_within_bound: bool
    final_mean_beta: float
    cycles: list[CycleLog] = field(default_factory=list)
    beta_trace: list[tuple[float, float]] = field(default_factory=list)

    def row(self) -> dict:
        return {
            "min_ground_distance": self.min_ground_distance,
            "completion_time": self.completion_time,
            "timed_out": int(self.timed_out),
            "collision_occurred": int(self.collision_occurred),
            "plan_failures": self.plan_failures,
            "evasive_cycles": self.evasive_cycles,
            "certificate_clean": int(self.certificate_clean),
            "tracking_within_bound": int(self.tracking_within_bound),
            "final_mean_beta": self.final_mean_beta,
        }


def build_model(cfg: ScenarioConfig) -> HumanModel:
    arena = cfg.build_arena()
    return HumanModel.from_metric(arena, cfg.model.goals,
                                  speed=cfg.human.speed,
                                  q_scale=cfg.model.q_scale)


def initial_belief(cfg: ScenarioConfig) -> ConfidenceBelief:
    """Uniform belief on the configured grid; fixed-beta methods get a
    single-hypothesis beta axis but still infer the goal when joint."""
    mode = cfg.model.resolved_inference()
    n_goals = len(cfg.model.goals) if mode == "joint" else None
    if cfg.method.kind == "fixed":
        betas = np.array([float(cfg.method.beta)])
    else:
        betas = default_beta_grid(cfg.model.beta_low, cfg.model.beta_high,
                                  cfg.model.beta_count)
    return ConfidenceBelief.uniform(betas, n_goals=n_goals,
                                    smoothing_eps=cfg.model.smoothing_eps)


def resolve_trajectory(cfg: ScenarioConfig) -> np.ndarray:
    tc = cfg.human.trajectory
    if tc.kind == "file":
        return read_trajectory_csv(tc.file)
    params = {"start": cfg.human.start, "speed": cfg.human.speed,
              "rate": tc.rate, "jitter": tc.jitter}
    if tc.kind == "direct":
        params["goal"] = tc.goal or cfg.model.goals[0]
    elif tc.kind == "spill_detour":
        params["goal"] = tc.goal or cfg.model.goals[0]
        start = np.asarray(cfg.human.start)
        goal = np.asarray(params["goal"])
        params["spill_center"] = (tc.spill_center
                                  if tc.spill_center is not None
                                  else tuple((start + goal) / 2.0))
        params["spill_radius"] = tc.spill_radius
        params["margin"] = tc.margin
        params["side"] = tc.side
    else:
        goals = list(cfg.model.goals)
        params["goal1"] = tc.goal1 or goals[0]
        params["goal2"] = tc.goal2 or (goals[1] if len(goals) > 1 else goals[0])
    return generate_trajectory(tc.kind, params, seed=cfg.sim.seed)


class SimSession:
    """Stepwise closed-loop state machine.

    Drives one run either from a recorded/synthetic trajectory (``run``) or
    from externally supplied grid moves (``live_tick``), using identical
    update logic in both modes.
    """

    def __init__(self, cfg: ScenarioConfig, live: bool = False):
        self.cfg = cfg
        self.arena = cfg.build_arena()
        self.keepout = cfg.build_keepout()
        self.model = build_model(cfg)
        self.bound = TrackingBound(*cfg.robot.bound)
        self.gains = ControlConfig(
            kp=cfg.robot.kp, kd=cfg.robot.kd, angle_max=cfg.robot.angle_max,
            thrust_min=cfg.robot.thrust_min_g * quadrotor.GRAVITY,
            thrust_max=cfg.robot.thrust_max_g * quadrotor.GRAVITY)
        self.inference_mode = cfg.model.resolved_inference()
        self.belief = initial_belief(cfg)
        self.goal_estimator = GoalEstimator.for_model(self.model)
        self.speed_est = SpeedEstimate(value=cfg.human.speed,
                                       window=cfg.model.speed_window)

        self.human_dt = self.arena.cell_size / cfg.human.speed
        self.plan_dt = self.arena.cell_size / cfg.planner.robot_speed
        self.substeps = max(1, round(self.plan_dt / self.human_dt))
        self.plan_cfg = PlanConfig(
            goal=cfg.robot.goal, p_threshold=cfg.planner.p_threshold,
            horizon=cfg.planner.horizon, robot_speed=cfg.planner.robot_speed,
            step_cost=cfg.planner.step_cost, dt=self.plan_dt)
        self.control_dt = 1.0 / cfg.robot.control_hz
        self.goal_tol = (cfg.sim.goal_tolerance
                         if cfg.sim.goal_tolerance is not None
                         else self.arena.cell_size / 2.0)

        self.live = live
        self.trajectory = None if live else resolve_trajectory(cfg)
        if live:
            start_xy = cfg.human.start
        else:
            start_xy = position_at(self.trajectory, 0.0)
        self.human_cell: Cell = self.arena.snap(*start_xy)
        self.human_xy = (float(start_xy[0]), float(start_xy[1]))
        self.goal_cell = self.arena.snap(cfg.robot.goal[0], cfg.robot.goal[1])

        # The quad starts exactly on its first reference waypoint (the
        # configured start snapped to the planning lattice), so the tracking
        # bound holds from t = 0.
        rx, ry = self.arena.cell_center(
            self.arena.snap(cfg.robot.start[0], cfg.robot.start[1]))
        self.state = QuadState(rx, ry, cfg.robot.start[2], 0.0, 0.0, 0.0)
        self.tick = 0
        self.step_count = 0
        self.plan_t0 = 0.0
        self.plan_obj: PlannedTrajectory | None = None
        self.prediction: OccupancyPrediction | None = None
        self.completed = False
        self.completion_time = math.nan

        self.min_ground_distance = math.inf
        self.collision_occurred = False
        self.plan_failures = 0
        self.evasive_cycles = 0
        self.certificate_clean = True
        self.max_dev = [0.0, 0.0, 0.0]
        self.cycles: list[CycleLog] = []
        self.beta_trace: list[tuple[float, float]] = []
        self._accel_rng = np.random.default_rng(cfg.sim.seed)

        self._record_metrics(0.0)
        self.beta_trace.append((0.0, self.belief.mean_beta))
        # A start already violating the threshold is a configuration problem
        # rather than a runtime condition, so the first plan may raise.
        self._replan(0.0, initial=True)

    # ------------------------------------------------------------------
    # inference + planning events

    def _current_goal_estimate(self) -> Cell | None:
        if self.inference_mode == "bootstrapped":
            return self.goal_estimator.best_goal(self.model)
        if not self.belief.joint and len(self.model.goals) > 1:
            return self.goal_estimator.best_goal(self.model)
        return None

    def _observe_step(self, t: float, new_cell: Cell,
                      true_xy: tuple[float, float]) -> None:
        prev = self.human_cell
        # Snapping can skip cells if the walker outruns one cell per step;
        # clamp the observation to the adjacent cell toward the target.
        dx = min(max(new_cell[0] - prev[0], -1), 1)
        dy = min(max(new_cell[1] - prev[1], -1), 1)
        observed = (prev[0] + dx, prev[1] + dy)
        action = infer_action(prev, observed)

        if self.cfg.method.kind != "fixed" or self.belief.joint:
            self.belief = self.belief.observe(
                prev, action, self.model,
                goal_estimate=self._current_goal_estimate())
        disp = math.hypot(true_xy[0] - self.human_xy[0],
                          true_xy[1] - self.human_xy[1])
        self.speed_est = self.speed_est.update(disp, self.human_dt)
        if self.inference_mode == "bootstrapped" or (
                not self.belief.joint and len(self.model.goals) > 1):
            self.goal_estimator = self.goal_estimator.update(
                prev, action, self.model)

        self.human_cell = observed
        self.human_xy = true_xy
        self.step_count += 1
        self.beta_trace.append((t, self.belief.mean_beta))

        # Certificate bookkeeping: the executing reference must not sit in
        # the inflated rectangle around the observed human cell.
        if self.plan_obj is not None:
            ref_pos, _ = self.plan_obj.reference_at(t - self.plan_t0)
            hx, hy = self.arena.cell_center(self.human_cell)
            half_x = (self.keepout.human_box_side + self.bound.ex) / 2.0
            half_y = (self.keepout.human_box_side + self.bound.ey) / 2.0
            if (abs(hx - ref_pos[0]) <= half_x
                    and abs(hy - ref_pos[1]) <= half_y):
                self.certificate_clean = False

        if self.step_count % (self.substeps * self.cfg.planner.replan_every) == 0:
            self._replan(t)

    def _speed_scale(self) -> float:
        if not self.cfg.model.speed_adaptive:
            return 1.0
        return float(np.clip(self.speed_est.value / self.cfg.human.speed,
                             0.25, 2.0))

    def _replan(self, t: float, initial: bool = False) -> None:
        goal_est = self._current_goal_estimate()
        self.prediction = propagate(
            self.human_cell, self.belief, self.model,
            self.cfg.planner.horizon, dt=self.plan_dt, goal=goal_est,
            mode=self.cfg.model.prediction_mode, substeps=self.substeps,
            speed_scale=self._speed_scale())

        unsafe = False
        if self.plan_obj is not None:
            remaining = self._remaining_plan(t)
            if remaining is not None:
                unsafe = replan_needed(remaining, self.prediction,
                                       self.plan_cfg, self.keepout, self.bound)

        start = (self.plan_obj.reference_at(t - self.plan_t0)[0]
                 if self.plan_obj is not None
                 else (self.state.px, self.state.py, self.state.pz))
        failure = False
        try:
            self.plan_obj = plan(start, self.prediction, self.plan_cfg,
                                 self.keepout, self.bound)
        except PlanInfeasibleError:
            if initial:
                raise
            # The forecast denies our own position outright.
            failure = True
            self.plan_failures += 1
            self.certificate_clean = False
            self.plan_obj = self._evasive_plan(start)
        if len(self.plan_obj.waypoints) == 1 and not self.plan_obj.reached_goal:
            # No safe step exists at all; back away from the mass instead of
            # freezing in place.
            self.evasive_cycles += 1
            self.plan_obj = self._evasive_plan(start)
        self.plan_t0 = t
        self.cycles.append(CycleLog(
            t=t, mean_beta=self.belief.mean_beta,
            beta_marginal=tuple(self.belief.beta_marginal().tolist()),
            goal_marginal=(tuple(self.belief.goal_marginal().tolist())
                           if self.belief.joint else None),
            plan_cost=self.plan_obj.total_cost,
            reached_goal=self.plan_obj.reached_goal,
            plan_unsafe=unsafe, plan_failure=failure))

    def _evasive_plan(self, start) -> PlannedTrajectory:
        """One-step least-risk move for states the planner must reject.

        Picks the neighbor (or stay) minimizing the next-step marginal, with
        ties broken by distance from the human and then canonical order.
        """
        cell = self.arena.snap(start[0], start[1])
        margs = marginal_grid(self.prediction, 1, self.keepout, self.bound)
        hx, hy = self.arena.cell_center(self.human_cell)
        best = None
        for name in ACTIONS:
            dx, dy = ACTION_VECTORS[name]
            nxt = (cell[0] + dx, cell[1] + dy)
            if not self.arena.contains(nxt):
                continue
            cx, cy = self.arena.cell_center(nxt)
            key = (margs[nxt[0], nxt[1]], -math.hypot(cx - hx, cy - hy))
            if best is None or key < best[0]:
                best = (key, nxt)
        target = best[1]
        tx, ty = self.arena.cell_center(target)
        p0 = marginal_collision_prob(self.prediction, 0, start,
                                     self.keepout, self.bound)
        wps = (
            Waypoint(t=0.0, pos=tuple(start), control=(
                (tx - start[0]) / self.plan_dt, (ty - start[1]) / self.plan_dt,
                0.0), p_coll=p0, cell=cell),
            Waypoint(t=self.plan_dt, pos=(tx, ty, start[2]),
                     control=(0.0, 0.0, 0.0),
                     p_coll=float(margs[target[0], target[1]]), cell=target),
        )
        return PlannedTrajectory(waypoints=wps, total_cost=math.inf,
                                 reached_goal=False, dt=self.plan_dt)

    def _remaining_plan(self, t: float) -> PlannedTrajectory | None:
        """Suffix of the active plan from the waypoint at or after t."""
        rel = t - self.plan_t0
        idx = max(0, min(int(math.ceil(rel / self.plan_dt - 1e-9)),
                         len(self.plan_obj.waypoints) - 1))
        wps = self.plan_obj.waypoints[idx:]
        if not wps:
            return None
        return replace(self.plan_obj, waypoints=wps)

    # ------------------------------------------------------------------
    # physics + metrics

    def _advance_physics_to(self, t_target: float) -> None:
        while not self.completed and (self.tick + 1) * self.control_dt <= t_target + 1e-9:
            t_next = (self.tick + 1) * self.control_dt
            ref_pos, ref_vel = self.plan_obj.reference_at(
                self.tick * self.control_dt - self.plan_t0)
            control = track(self.state, ref_pos, ref_vel, self.gains)
            self.state = step_quad(self.state, control, self.control_dt,
                                   self.gains, self.cfg.robot.integrator)
            noise = self.cfg.robot.accel_noise
            if noise:
                kick = self._accel_rng.uniform(-noise, noise, size=3)
                self.state = QuadState(
                    self.state.px, self.state.py, self.state.pz,
                    self.state.vx + kick[0] * self.control_dt,
                    self.state.vy + kick[1] * self.control_dt,
                    self.state.vz + kick[2] * self.control_dt)
            self.tick += 1
            self._record_metrics(t_next)
            self._check_completion(t_next)

    def _human_xy_at(self, t: float) -> tuple[float, float]:
        if self.live or self.trajectory is None:
            return self.arena.cell_center(self.human_cell)
        return position_at(self.trajectory, t)

    def _record_metrics(self, t: float) -> None:
        hx, hy = self._human_xy_at(t)
        px, py, pz = project(self.state)
        d = math.hypot(px - hx, py - hy)
        self.min_ground_distance = min(self.min_ground_distance, d)
        half = self.keepout.human_box_side / 2.0
        if abs(px - hx) <= half and abs(py - hy) <= half:
            self.collision_occurred = True
        if self.plan_obj is not None:
            ref_pos, _ = self.plan_obj.reference_at(t - self.plan_t0)
            for i, (a, b) in enumerate(zip((px, py, pz), ref_pos)):
                self.max_dev[i] = max(self.max_dev[i], abs(a - b))

    def _check_completion(self, t: float) -> None:
        if self.completed or self.plan_obj is None:
            return
        if not self.plan_obj.reached_goal:
            return
        rel = t - self.plan_t0
        if rel + 1e-9 < (len(self.plan_obj.waypoints) - 1) * self.plan_dt:
            return
        goal_pos = self.plan_obj.waypoints[-1].pos
        px, py, pz = project(self.state)
        if math.hypot(px - goal_pos[0], py - goal_pos[1]) <= self.goal_tol \
                and abs(pz - goal_pos[2]) <= self.goal_tol:
            self.completed = True
            self.completion_time = t

    # ------------------------------------------------------------------
    # drivers

    def run(self) -> RunMetrics:
        if self.live:
            raise RuntimeError("run() drives replay sessions only")
        k = 1
        while not self.completed:
            t_event = k * self.human_dt
            if t_event > self.cfg.sim.timeout:
                self._advance_physics_to(self.cfg.sim.timeout)
                break
            self._advance_physics_to(t_event)
            if self.completed:
                break
            xy = position_at(self.trajectory, t_event)
            new_cell = self.arena.snap(xy[0], xy[1], prev=self.human_cell)
            self._observe_step(t_event, new_cell, xy)
            k += 1
        return self.metrics()

    def live_tick(self, dx: int = 0, dy: int = 0) -> None:
        """Advance one human step with a commanded move (live mode)."""
        if not self.live:
            raise RuntimeError("live_tick() drives live sessions only")
        if self.completed:
            return
        t_event = (self.step_count + 1) * self.human_dt
        self._advance_physics_to(t_event)
        nx = min(max(self.human_cell[0] + dx, 0), self.arena.cols - 1)
        ny = min(max(self.human_cell[1] + dy, 0), self.arena.rows - 1)
        new_cell = (nx, ny)
        self._observe_step(t_event, new_cell, self.arena.cell_center(new_cell))

    def sim_time(self) -> float:
        return self.tick * self.control_dt

    def metrics(self) -> RunMetrics:
        timed_out = not self.completed
        half = [self.bound.ex / 2.0, self.bound.ey / 2.0, self.bound.ez / 2.0]
        within = all(dev <= h + 1e-9 for dev, h in zip(self.max_dev, half))
        return RunMetrics(
            min_ground_distance=self.min_ground_distance,
            completion_time=(self.completion_time if self.completed
                             else self.cfg.sim.timeout),
            timed_out=timed_out,
            collision_occurred=self.collision_occurred,
            plan_failures=self.plan_failures,
            evasive_cycles=self.evasive_cycles,
            certificate_clean=self.certificate_clean and within,
            tracking_max_dev=tuple(self.max_dev),
            tracking_within_bound=within,
            final_mean_beta=self.belief.mean_beta,
            cycles=self.cycles,
            beta_trace=self.beta_trace,
        )


def run(cfg: ScenarioConfig) -> RunMetrics:
    """Execute one scenario end to end."""
    return SimSession(cfg).run()


def _run_worker(cfg: ScenarioConfig) -> RunMetrics:
    return run(cfg)


@dataclass
class ComparisonRow:
    trajectory_seed: int
    method: str
    metrics: RunMetrics


@dataclass
class ComparisonResult:
    rows: list[ComparisonRow]

    def method_values(self, method: str, key) -> list[float]:
        return [key(r.metrics) for r in self.rows if r.method == method]

    def aggregate(self) -> dict:
        """Per-method medians/quartiles of the paper-style metrics, plus
        paired completion-time differences against the inferred method."""
        methods = sorted({r.method for r in self.rows})
        out = {}
        for m in methods:
            dist = self.method_values(m, lambda x: x.min_ground_distance)
            time_ = self.method_values(m, lambda x: x.completion_time)
            out[m] = {
                "min_distance_median": float(np.median(dist)),
                "min_distance_q25": float(np.percentile(dist, 25)),
                "min_distance_q75": float(np.percentile(dist, 75)),
                "completion_time_median": float(np.median(time_)),
                "collisions": int(sum(
                    r.metrics.collision_occurred for r in self.rows
                    if r.method == m)),
            }
        if "infer" in methods:
            infer_t = {r.trajectory_seed: r.metrics.completion_time
                       for r in self.rows if r.method == "infer"}
            for m in methods:
                if m == "infer":
                    continue
                diffs = [infer_t[r.trajectory_seed] - r.metrics.completion_time
                         for r in self.rows
                         if r.method == m and r.trajectory_seed in infer_t]
                if diffs:
                    out[m]["time_diff_vs_infer_median"] = float(np.median(diffs))
        return out


def method_label(mc: MethodConfig) -> str:
    return "infer" if mc.kind == "infer" else f"fixed:{mc.beta:g}"


def compare_methods(cfg_base: ScenarioConfig, methods: list[MethodConfig],
                    seeds: list[int], jobs: int = 1) -> ComparisonResult:
    """Run every (method, trajectory seed) pair; runs are independent and the
    row order is deterministic regardless of parallelism."""
    if len(methods) < 1:
        raise ValueError("need at least one method")
    tasks = []
    labels = []
    for seed in seeds:
        for mc in methods:
            cfg = replace(cfg_base, method=mc,
                          sim=replace(cfg_base.sim, seed=seed))
            tasks.append(cfg)
            labels.append((seed, method_label(mc)))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_worker, tasks))
    else:
        results = [run(cfg) for cfg in tasks]
    rows = [ComparisonRow(trajectory_seed=s, method=m, metrics=r)
            for (s, m), r in zip(labels, results)]
    return ComparisonResult(rows=rows)
