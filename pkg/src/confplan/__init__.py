"""Confidence-aware human motion prediction and probabilistically safe
robot planning, with a closed-loop quadcopter simulator."""

from .collision import (CollisionSet, TrackingBound, collision_set,
                        marginal_collision_prob, trajectory_collision_prob)
from .confidence import (ConfidenceBelief, GoalEstimator, SpeedEstimate,
                         default_beta_grid, update_speed)
from .gridworld import (ACTIONS, ACTION_VECTORS, Arena, KeepOutSpec,
                        feasible_actions, human_step_dt, infer_action,
                        step_human)
from .human_model import HumanModel, boltzmann_probs
from .planning import (NoSafePlanError, PlanConfig, PlanInfeasibleError,
                       PlannedTrajectory, Waypoint, plan, replan_needed)
from .prediction import (OccupancyPrediction, propagate, propagate_conditional,
                         read_occupancy, write_occupancy)
from .quadrotor import (GRAVITY, ControlConfig, QuadControl, QuadState,
                        project, step_quad, track)
from .scenario import ConfigError, ScenarioConfig, load_scenario, parse_method
from .simulation import (RunMetrics, SimSession, compare_methods, run)
from .trajectories import generate_trajectory, read_trajectory_csv, \
    write_trajectory_csv

__version__ = "0.1.0"
