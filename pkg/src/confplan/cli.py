"""Command-line entry points: predict, plan, simulate, compare, gen-traj,
serve.

Every subcommand reads a scenario file; individual keys can be overridden
with repeated ``--set section.key=value`` flags (flags win over the file).
Selected flags also read defaults from ``CONFPLAN_<NAME>`` environment
variables (SEED, JOBS, OUT, PORT), which keeps CI invocations short.

Exit codes: 0 success, 2 configuration error, 3 infeasible plan, 4 timeout.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys
from pathlib import Path

import numpy as np

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_TIMEOUT = 4


def _env(name: str, default=None, cast=str):
    raw = os.environ.get(f"CONFPLAN_{name}")
    if raw is None:
        return default
    try:
        return cast(raw)
    except ValueError:
        print(f"warning: ignoring CONFPLAN_{name}={raw!r}", file=sys.stderr)
        return default


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="confplan",
        description="Confidence-aware human prediction and safe planning")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--scenario", required=True,
                       help="scenario YAML file (see README for the schema)")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY.PATH=VALUE",
                       help="override one scenario key (repeatable)")

    p = sub.add_parser("predict", help="dump the occupancy forecast from the "
                                       "human start under the initial belief")
    add_common(p)
    p.add_argument("--horizon", type=int, default=None,
                   help="forecast steps (default: planner horizon)")
    p.add_argument("--out", default=_env("OUT", "out"), help="output directory")
    p.add_argument("--verify", action="store_true",
                   help="re-read the dump and check it bit-exactly")

    p = sub.add_parser("plan", help="plan once against the initial forecast")
    add_common(p)
    p.add_argument("--out", default=_env("OUT", "out"))

    p = sub.add_parser("simulate", help="run one closed-loop scenario")
    add_common(p)
    p.add_argument("--method", default=None,
                   help="infer or fixed:BETA (overrides the scenario)")
    p.add_argument("--seed", type=int, default=_env("SEED", None, int))
    p.add_argument("--out", default=_env("OUT", "out"))

    p = sub.add_parser("compare", help="paired runs of several methods over "
                                       "several trajectory seeds")
    add_common(p)
    p.add_argument("--methods", default="infer,fixed:0.05,fixed:10",
                   help="comma-separated method specs")
    p.add_argument("--trajectories", type=int, default=8,
                   help="number of trajectory seeds")
    p.add_argument("--seed", type=int, default=_env("SEED", 0, int),
                   help="first trajectory seed")
    p.add_argument("--jobs", type=int, default=_env("JOBS", 1, int))
    p.add_argument("--out", default=_env("OUT", "out"))

    p = sub.add_parser("gen-traj", help="write a synthetic human trajectory")
    add_common(p)
    p.add_argument("--seed", type=int, default=_env("SEED", 0, int))
    p.add_argument("--out", default=_env("OUT", "trajectory.csv"),
                   help="output CSV file")

    p = sub.add_parser("serve", help="run the live websocket service")
    add_common(p)
    p.add_argument("--port", type=int, default=_env("PORT", 8008, int))
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--tick-hz", type=float, default=4.0,
                   help="human tick rate; 0 means client-driven ticks")

    return parser


def _load(args):
    from .scenario import load_scenario
    return load_scenario(args.scenario, overrides=tuple(args.overrides))


def _write_trajectory_csv(traj, path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["t", "px", "py", "pz", "ux", "uy", "uz", "pcoll"])
        for wp in traj.waypoints:
            w.writerow([repr(float(v)) for v in
                        (wp.t, *wp.pos, *wp.control, wp.p_coll)])


def cmd_predict(args) -> int:
    from .prediction import propagate, read_occupancy, write_occupancy
    from .simulation import build_model, initial_belief

    cfg = _load(args)
    model = build_model(cfg)
    belief = initial_belief(cfg)
    arena = cfg.build_arena()
    start = arena.snap(*cfg.human.start)
    horizon = args.horizon if args.horizon is not None else cfg.planner.horizon
    goal_est = model.goals[0] if not belief.joint else None
    pred = propagate(start, belief, model, horizon, goal=goal_est,
                     mode=cfg.model.prediction_mode)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "occupancy.csv"
    write_occupancy(pred, path)
    if args.verify:
        back = read_occupancy(path, arena=arena)
        if not np.array_equal(back.grids, pred.grids) or back.dt != pred.dt:
            print("verify: round-trip mismatch", file=sys.stderr)
            return EXIT_CONFIG
        sums = pred.grids.sum(axis=(1, 2))
        if not np.allclose(sums, 1.0, atol=1e-9):
            print("verify: grids do not sum to 1", file=sys.stderr)
            return EXIT_CONFIG
        print(f"verified {path} ({horizon + 1} grids)")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_plan(args) -> int:
    from .collision import TrackingBound
    from .planning import PlanConfig, plan
    from .prediction import propagate
    from .simulation import build_model, initial_belief

    cfg = _load(args)
    model = build_model(cfg)
    belief = initial_belief(cfg)
    arena = cfg.build_arena()
    plan_dt = arena.cell_size / cfg.planner.robot_speed
    substeps = max(1, round(plan_dt / (arena.cell_size / cfg.human.speed)))
    start = arena.snap(*cfg.human.start)
    goal_est = model.goals[0] if not belief.joint else None
    pred = propagate(start, belief, model, cfg.planner.horizon, dt=plan_dt,
                     goal=goal_est, substeps=substeps,
                     mode=cfg.model.prediction_mode)
    pcfg = PlanConfig(goal=cfg.robot.goal, p_threshold=cfg.planner.p_threshold,
                      horizon=cfg.planner.horizon,
                      robot_speed=cfg.planner.robot_speed,
                      step_cost=cfg.planner.step_cost, dt=plan_dt)
    traj = plan(cfg.robot.start, pred, pcfg, cfg.build_keepout(),
                TrackingBound(*cfg.robot.bound))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "trajectory.csv"
    _write_trajectory_csv(traj, path)
    print(f"wrote {path} (cost {traj.total_cost:.4f}, "
          f"reached_goal={traj.reached_goal})")
    return EXIT_OK


def _metrics_row(metrics, extra=None) -> dict:
    row = dict(extra or {})
    row.update(metrics.row())
    return row


def _write_metrics_csv(rows, path) -> None:
    fields = list(rows[0].keys())
    with open(path, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=fields)
        w.writeheader()
        for row in rows:
            w.writerow(row)


def cmd_simulate(args) -> int:
    from .scenario import parse_method
    from .simulation import method_label, run

    cfg = _load(args)
    if args.method is not None:
        cfg = dataclasses.replace(cfg, method=parse_method(args.method))
    if args.seed is not None:
        cfg = dataclasses.replace(
            cfg, sim=dataclasses.replace(cfg.sim, seed=args.seed))
    metrics = run(cfg)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    label = method_label(cfg.method)
    row = _metrics_row(metrics, {"method": label, "seed": cfg.sim.seed})
    _write_metrics_csv([row], out / "metrics.csv")
    with open(out / "summary.json", "w") as f:
        json.dump(row, f, sort_keys=True, indent=2)
        f.write("\n")
    with open(out / "beta_trace.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["t", "mean_beta"])
        for t, b in metrics.beta_trace:
            w.writerow([repr(float(t)), repr(float(b))])
    with open(out / "cycles.csv", "w", newline="") as f:
        w = csv.writer(f)
        n_beta = len(metrics.cycles[0].beta_marginal) if metrics.cycles else 0
        w.writerow(["t", "mean_beta", "plan_cost", "reached_goal",
                    "plan_unsafe", "plan_failure"]
                   + [f"belief_{i}" for i in range(n_beta)])
        for c in metrics.cycles:
            w.writerow([repr(float(c.t)), repr(float(c.mean_beta)),
                        repr(float(c.plan_cost)), int(c.reached_goal),
                        int(c.plan_unsafe), int(c.plan_failure)]
                       + [repr(float(p)) for p in c.beta_marginal])
    print(f"method={label} min_distance={metrics.min_ground_distance:.3f} "
          f"time={metrics.completion_time:.2f} "
          f"collision={metrics.collision_occurred}")
    return EXIT_TIMEOUT if metrics.timed_out else EXIT_OK


def cmd_compare(args) -> int:
    from .scenario import ConfigError, parse_method
    from .simulation import compare_methods

    cfg = _load(args)
    methods = [parse_method(s.strip()) for s in args.methods.split(",") if s]
    if len(methods) < 2:
        raise ConfigError("compare needs at least two methods")
    seeds = list(range(args.seed, args.seed + args.trajectories))
    result = compare_methods(cfg, methods, seeds, jobs=max(args.jobs, 1))

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = [_metrics_row(r.metrics, {"method": r.method,
                                     "seed": r.trajectory_seed})
            for r in result.rows]
    _write_metrics_csv(rows, out / "runs.csv")
    agg = result.aggregate()
    with open(out / "aggregate.json", "w") as f:
        json.dump(agg, f, sort_keys=True, indent=2)
        f.write("\n")
    for method, stats in sorted(agg.items()):
        print(f"{method}: median min distance "
              f"{stats['min_distance_median']:.3f} m, median time "
              f"{stats['completion_time_median']:.2f} s, "
              f"collisions {stats['collisions']}")
    return EXIT_OK


def cmd_gen_traj(args) -> int:
    from .simulation import resolve_trajectory
    from .trajectories import write_trajectory_csv

    cfg = _load(args)
    cfg = dataclasses.replace(
        cfg, sim=dataclasses.replace(cfg.sim, seed=args.seed))
    samples = resolve_trajectory(cfg)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_trajectory_csv(samples, out)
    print(f"wrote {out} ({len(samples)} samples, "
          f"{samples[-1, 0]:.2f} s)")
    return EXIT_OK


def cmd_serve(args) -> int:
    from .server import serve

    cfg = _load(args)
    print(f"serving ws://{args.host}:{args.port}/ws "
          f"(tick_hz={args.tick_hz})")
    serve(cfg, port=args.port, host=args.host, tick_hz=args.tick_hz)
    return EXIT_OK


def main(argv=None) -> int:
    from .planning import NoSafePlanError, PlanInfeasibleError
    from .scenario import ConfigError

    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "predict": cmd_predict,
        "plan": cmd_plan,
        "simulate": cmd_simulate,
        "compare": cmd_compare,
        "gen-traj": cmd_gen_traj,
        "serve": cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except (ConfigError, OSError) as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (PlanInfeasibleError, NoSafePlanError) as e:
        print(f"infeasible plan: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
