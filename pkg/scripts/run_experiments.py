#!/usr/bin/env python3
"""Reproduce the three-environment method comparison.

Runs the adaptive-confidence method against the two fixed baselines over
paired synthetic trajectories in the complete-model, unmodeled-obstacle
(spill), and unmodeled-goal (triangle) environments, then prints the
aggregate table and writes per-run CSVs under out/experiments/.

Usage: python scripts/run_experiments.py [--seeds N] [--jobs J]
"""

import argparse
import csv
import json
import os
from pathlib import Path

from confplan.scenario import MethodConfig, load_scenario
from confplan.simulation import compare_methods

ROOT = Path(__file__).resolve().parent.parent
METHODS = [MethodConfig(kind="infer"),
           MethodConfig(kind="fixed", beta=10.0),
           MethodConfig(kind="fixed", beta=0.05)]


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--seeds", type=int, default=8)
    parser.add_argument("--jobs", type=int,
                        default=min(os.cpu_count() or 1, 4))
    parser.add_argument("--out", default=str(ROOT / "out" / "experiments"))
    args = parser.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    seeds = list(range(args.seeds))

    for name in ("complete", "spill", "triangle"):
        cfg = load_scenario(ROOT / "scenarios" / f"{name}.yaml")
        result = compare_methods(cfg, METHODS, seeds, jobs=args.jobs)

        with open(out / f"{name}_runs.csv", "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["seed", "method", "min_ground_distance",
                        "completion_time", "collision", "timed_out"])
            for r in result.rows:
                w.writerow([r.trajectory_seed, r.method,
                            repr(r.metrics.min_ground_distance),
                            repr(r.metrics.completion_time),
                            int(r.metrics.collision_occurred),
                            int(r.metrics.timed_out)])

        agg = result.aggregate()
        with open(out / f"{name}_aggregate.json", "w") as f:
            json.dump(agg, f, sort_keys=True, indent=2)
            f.write("\n")

        print(f"\n=== {name} ({len(seeds)} paired trajectories) ===")
        for method in ("infer", "fixed:10", "fixed:0.05"):
            s = agg[method]
            diff = s.get("time_diff_vs_infer_median")
            diff_s = "" if diff is None else \
                f"  T_infer - T_this = {diff:+.2f} s"
            print(f"  {method:<11} min distance median "
                  f"{s['min_distance_median']:.3f} m "
                  f"(q25 {s['min_distance_q25']:.3f}, "
                  f"q75 {s['min_distance_q75']:.3f})  "
                  f"time median {s['completion_time_median']:.2f} s  "
                  f"collisions {s['collisions']}{diff_s}")


if __name__ == "__main__":
    main()
