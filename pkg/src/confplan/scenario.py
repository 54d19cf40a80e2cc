"""Scenario configuration: YAML schema, validation, and overrides.

A scenario file has nested sections (arena, keepout, human, model, method,
planner, robot, sim); every key has a default so minimal files stay small.
Unknown keys are rejected so typos fail fast.  Flag-style overrides use
dotted paths ("planner.p_threshold=0.02") and win over the file.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .gridworld import Arena, KeepOutSpec
from .trajectories import KINDS


class ConfigError(Exception):
    """Malformed scenario configuration."""


@dataclass(frozen=True)
class TrajectoryConfig:
    kind: str = "direct"               # direct | spill_detour | triangle | file
    file: str | None = None
    goal: tuple[float, float] | None = None
    goal1: tuple[float, float] | None = None
    goal2: tuple[float, float] | None = None
    spill_center: tuple[float, float] | None = None
    spill_radius: float = 0.4
    margin: float = 0.08
    side: int = 1
    rate: float = 100.0
    jitter: float = 0.0


@dataclass(frozen=True)
class HumanConfig:
    start: tuple[float, float] = (0.55, 0.55)
    speed: float = 1.0
    trajectory: TrajectoryConfig = field(default_factory=TrajectoryConfig)


@dataclass(frozen=True)
class ModelConfig:
    goals: tuple[tuple[float, float], ...] = ((3.05, 3.05),)
    inference: str | None = None        # joint | beta_only | bootstrapped
    beta_low: float = 0.05
    beta_high: float = 10.0
    beta_count: int = 10
    smoothing_eps: float = 0.02
    speed_window: int = 10
    q_scale: float = 1.0
    prediction_mode: str = "mixture"    # mixture | map
    speed_adaptive: bool = False

    def resolved_inference(self) -> str:
        if self.inference is not None:
            return self.inference
        return "joint" if len(self.goals) > 1 else "beta_only"


@dataclass(frozen=True)
class MethodConfig:
    kind: str = "infer"                 # infer | fixed
    beta: float | None = None


@dataclass(frozen=True)
class PlannerConfig:
    p_threshold: float = 0.01
    horizon: int = 20
    robot_speed: float = 0.25
    step_cost: float = 0.5
    replan_every: int = 1               # planning steps between replans


@dataclass(frozen=True)
class RobotConfig:
    start: tuple[float, float, float] = (0.55, 3.1, 1.0)
    goal: tuple[float, float, float] = (3.1, 0.55, 1.0)
    bound: tuple[float, float, float] = (0.1, 0.1, 0.1)
    kp: float = 8.0
    kd: float = 5.5
    angle_max: float = 0.15
    thrust_min_g: float = 0.5
    thrust_max_g: float = 1.5
    control_hz: float = 100.0
    integrator: str = "euler"
    accel_noise: float = 0.0   # bounded uniform acceleration disturbance


@dataclass(frozen=True)
class SimConfig:
    timeout: float = 120.0
    seed: int = 0
    goal_tolerance: float | None = None   # defaults to cell_size / 2


@dataclass(frozen=True)
class ScenarioConfig:
    arena_side: float = 3.66
    arena_height: float = 2.0
    cell_size: float = 0.1524
    human_box_side: float = 0.3
    human: HumanConfig = field(default_factory=HumanConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    method: MethodConfig = field(default_factory=MethodConfig)
    planner: PlannerConfig = field(default_factory=PlannerConfig)
    robot: RobotConfig = field(default_factory=RobotConfig)
    sim: SimConfig = field(default_factory=SimConfig)

    def build_arena(self) -> Arena:
        return Arena(side_length=self.arena_side, height=self.arena_height,
                     cell_size=self.cell_size)

    def build_keepout(self) -> KeepOutSpec:
        return KeepOutSpec(arena=self.build_arena(),
                           human_box_side=self.human_box_side)


def _pair(value, where: str) -> tuple[float, float]:
    try:
        x, y = value
        return (float(x), float(y))
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{where}: expected [x, y], got {value!r}") from e


def _triple(value, where: str) -> tuple[float, float, float]:
    try:
        x, y, z = value
        return (float(x), float(y), float(z))
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{where}: expected [x, y, z], got {value!r}") from e


def _section(raw: dict, name: str) -> dict:
    sec = raw.pop(name, {}) or {}
    if not isinstance(sec, dict):
        raise ConfigError(f"section {name!r} must be a mapping")
    return dict(sec)


def _reject_unknown(sec: dict, name: str) -> None:
    if sec:
        raise ConfigError(f"unknown keys in {name}: {sorted(sec)}")


def scenario_from_dict(raw: dict) -> ScenarioConfig:
    raw = copy.deepcopy(raw or {})
    if not isinstance(raw, dict):
        raise ConfigError("scenario must be a mapping")

    arena = _section(raw, "arena")
    keepout = _section(raw, "keepout")
    human = _section(raw, "human")
    model = _section(raw, "model")
    method = _section(raw, "method")
    planner = _section(raw, "planner")
    robot = _section(raw, "robot")
    sim = _section(raw, "sim")
    if raw:
        raise ConfigError(f"unknown top-level sections: {sorted(raw)}")

    traj_raw = human.pop("trajectory", {}) or {}
    traj = TrajectoryConfig(
        kind=str(traj_raw.pop("kind", "direct")),
        file=traj_raw.pop("file", None),
        goal=_pair(traj_raw.pop("goal"), "human.trajectory.goal")
        if "goal" in traj_raw else None,
        goal1=_pair(traj_raw.pop("goal1"), "human.trajectory.goal1")
        if "goal1" in traj_raw else None,
        goal2=_pair(traj_raw.pop("goal2"), "human.trajectory.goal2")
        if "goal2" in traj_raw else None,
        spill_center=_pair(traj_raw.pop("spill_center"),
                           "human.trajectory.spill_center")
        if "spill_center" in traj_raw else None,
        spill_radius=float(traj_raw.pop("spill_radius", 0.4)),
        margin=float(traj_raw.pop("margin", 0.08)),
        side=int(traj_raw.pop("side", 1)),
        rate=float(traj_raw.pop("rate", 100.0)),
        jitter=float(traj_raw.pop("jitter", 0.0)),
    )
    _reject_unknown(traj_raw, "human.trajectory")
    if traj.kind not in KINDS + ("file",):
        raise ConfigError(f"unknown trajectory kind {traj.kind!r}")
    if traj.kind == "file" and not traj.file:
        raise ConfigError("trajectory kind 'file' requires a file path")

    cfg = ScenarioConfig(
        arena_side=float(arena.pop("side_length", 3.66)),
        arena_height=float(arena.pop("height", 2.0)),
        cell_size=float(arena.pop("cell_size", 0.1524)),
        human_box_side=float(keepout.pop("human_box_side", 0.3)),
        human=HumanConfig(
            start=_pair(human.pop("start", (0.55, 0.55)), "human.start"),
            speed=float(human.pop("speed", 1.0)),
            trajectory=traj,
        ),
        model=ModelConfig(
            goals=tuple(_pair(g, "model.goals")
                        for g in model.pop("goals", [[3.05, 3.05]])),
            inference=model.pop("inference", None),
            beta_low=float(model.pop("beta_low", 0.05)),
            beta_high=float(model.pop("beta_high", 10.0)),
            beta_count=int(model.pop("beta_count", 10)),
            smoothing_eps=float(model.pop("smoothing_eps", 0.02)),
            speed_window=int(model.pop("speed_window", 10)),
            q_scale=float(model.pop("q_scale", 1.0)),
            prediction_mode=str(model.pop("prediction_mode", "mixture")),
            speed_adaptive=bool(model.pop("speed_adaptive", False)),
        ),
        method=_make_method(method),
        planner=PlannerConfig(
            p_threshold=float(planner.pop("p_threshold", 0.01)),
            horizon=int(planner.pop("horizon", 20)),
            robot_speed=float(planner.pop("robot_speed", 0.25)),
            step_cost=float(planner.pop("step_cost", 0.5)),
            replan_every=int(planner.pop("replan_every", 1)),
        ),
        robot=RobotConfig(
            start=_triple(robot.pop("start", (0.55, 3.1, 1.0)), "robot.start"),
            goal=_triple(robot.pop("goal", (3.1, 0.55, 1.0)), "robot.goal"),
            bound=_triple(robot.pop("bound", (0.1, 0.1, 0.1)), "robot.bound"),
            kp=float(robot.pop("kp", 8.0)),
            kd=float(robot.pop("kd", 5.5)),
            angle_max=float(robot.pop("angle_max", 0.15)),
            thrust_min_g=float(robot.pop("thrust_min_g", 0.5)),
            thrust_max_g=float(robot.pop("thrust_max_g", 1.5)),
            control_hz=float(robot.pop("control_hz", 100.0)),
            integrator=str(robot.pop("integrator", "euler")),
            accel_noise=float(robot.pop("accel_noise", 0.0)),
        ),
        sim=SimConfig(
            timeout=float(sim.pop("timeout", 120.0)),
            seed=int(sim.pop("seed", 0)),
            goal_tolerance=float(sim["goal_tolerance"])
            if sim.pop("goal_tolerance", None) is not None else None,
        ),
    )
    for sec, name in ((arena, "arena"), (keepout, "keepout"), (human, "human"),
                      (model, "model"), (method, "method"),
                      (planner, "planner"), (robot, "robot"), (sim, "sim")):
        _reject_unknown(sec, name)
    validate_scenario(cfg)
    return cfg


def _make_method(method: dict) -> MethodConfig:
    beta = method.pop("beta", None)
    return MethodConfig(kind=str(method.pop("kind", "infer")),
                        beta=float(beta) if beta is not None else None)


def parse_method(spec: str) -> MethodConfig:
    """Parse a command-line method spec: 'infer' or 'fixed:BETA'."""
    if spec == "infer":
        return MethodConfig(kind="infer")
    if spec.startswith("fixed:"):
        try:
            return MethodConfig(kind="fixed", beta=float(spec.split(":", 1)[1]))
        except ValueError as e:
            raise ConfigError(f"bad fixed beta in {spec!r}") from e
    raise ConfigError(f"unknown method {spec!r} (use infer or fixed:BETA)")


def validate_scenario(cfg: ScenarioConfig) -> None:
    if cfg.method.kind not in ("infer", "fixed"):
        raise ConfigError(f"unknown method kind {cfg.method.kind!r}")
    if cfg.method.kind == "fixed" and cfg.method.beta is None:
        raise ConfigError("method 'fixed' requires a beta value")
    if cfg.model.resolved_inference() not in ("joint", "beta_only",
                                              "bootstrapped"):
        raise ConfigError(f"unknown inference mode {cfg.model.inference!r}")
    if cfg.model.prediction_mode not in ("mixture", "map"):
        raise ConfigError("prediction_mode must be 'mixture' or 'map'")
    if not 0.0 <= cfg.planner.p_threshold <= 1.0:
        raise ConfigError("planner.p_threshold must be in [0, 1]")
    if cfg.planner.replan_every < 1:
        raise ConfigError("planner.replan_every must be >= 1")
    if cfg.robot.integrator not in ("euler", "rk4"):
        raise ConfigError("robot.integrator must be 'euler' or 'rk4'")
    if cfg.sim.timeout <= 0:
        raise ConfigError("sim.timeout must be positive")
    traj = cfg.human.trajectory
    if traj.kind == "file" and not Path(traj.file).exists():
        raise ConfigError(f"trajectory file not found: {traj.file}")
    try:
        arena = cfg.build_arena()
        cfg.build_keepout()
    except ValueError as e:
        raise ConfigError(str(e)) from e
    for g in cfg.model.goals:
        if not arena.contains_point(*g):
            raise ConfigError(f"model goal {g} outside arena")
    if not arena.contains_point(*cfg.human.start):
        raise ConfigError("human.start outside arena")


def load_scenario(path, overrides: tuple[str, ...] = ()) -> ScenarioConfig:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"scenario file not found: {path}")
    try:
        raw = yaml.safe_load(p.read_text()) or {}
    except yaml.YAMLError as e:
        raise ConfigError(f"malformed YAML in {path}: {e}") from e
    for item in overrides:
        raw = apply_override(raw, item)
    return scenario_from_dict(raw)


def apply_override(raw: dict, item: str) -> dict:
    """Apply one 'dotted.path=value' override (values parsed as YAML)."""
    if "=" not in item:
        raise ConfigError(f"override {item!r} must look like key.path=value")
    path, value_s = item.split("=", 1)
    keys = path.strip().split(".")
    try:
        value = yaml.safe_load(value_s)
    except yaml.YAMLError as e:
        raise ConfigError(f"bad override value {value_s!r}: {e}") from e
    out = copy.deepcopy(raw)
    node = out
    for k in keys[:-1]:
        node = node.setdefault(k, {})
        if not isinstance(node, dict):
            raise ConfigError(f"override path {path!r} crosses a scalar")
    node[keys[-1]] = value
    return out
