"""Near-hover quadcopter dynamics, planning-space projection, and tracking.

The high-fidelity state is position plus velocity in the world frame; in the
near-hover regime the translational dynamics decouple per axis:

    dp/dt = v
    dv/dt = (g * tan(pitch), -g * tan(roll), thrust - g)

with thrust and the two attitude angles as controls.  The planner only sees
the projected position, and a saturated PD tracker inverts the same map to
follow its reference; the resulting per-axis tracking error is validated
empirically against the configured tracking bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

GRAVITY = 9.81


class QuadState(NamedTuple):
    px: float
    py: float
    pz: float
    vx: float
    vy: float
    vz: float


class QuadControl(NamedTuple):
    thrust: float
    roll: float
    pitch: float


HOVER = QuadControl(thrust=GRAVITY, roll=0.0, pitch=0.0)


@dataclass(frozen=True)
class ControlConfig:
    """PD tracking gains and actuator limits."""

    kp: float = 8.0
    kd: float = 5.5
    angle_max: float = 0.15
    thrust_min: float = 0.5 * GRAVITY
    thrust_max: float = 1.5 * GRAVITY

    def __post_init__(self):
        if self.angle_max <= 0 or self.angle_max >= math.pi / 2:
            raise ValueError("angle_max must be in (0, pi/2)")
        if not 0 < self.thrust_min < self.thrust_max:
            raise ValueError("need 0 < thrust_min < thrust_max")


DEFAULT_CONTROL = ControlConfig()


def _check_limits(c: QuadControl, limits: ControlConfig) -> None:
    if abs(c.roll) > limits.angle_max + 1e-12 or abs(c.pitch) > limits.angle_max + 1e-12:
        raise ValueError(f"attitude command outside +/-{limits.angle_max} rad")
    if not limits.thrust_min - 1e-12 <= c.thrust <= limits.thrust_max + 1e-12:
        raise ValueError("thrust command outside limits")


def _accel(c: QuadControl) -> tuple[float, float, float]:
    return (GRAVITY * math.tan(c.pitch),
            -GRAVITY * math.tan(c.roll),
            c.thrust - GRAVITY)


def step_quad(s: QuadState, c: QuadControl, dt: float,
              limits: ControlConfig = DEFAULT_CONTROL,
              integrator: str = "euler") -> QuadState:
    """Advance the state by dt under a held control."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    _check_limits(c, limits)
    ax, ay, az = _accel(c)
    if integrator == "euler":
        return QuadState(s.px + s.vx * dt, s.py + s.vy * dt, s.pz + s.vz * dt,
                         s.vx + ax * dt, s.vy + ay * dt, s.vz + az * dt)
    if integrator == "rk4":
        # Classic fourth-order step; exact here since acceleration is
        # constant over the interval.
        def deriv(state):
            return (state[3], state[4], state[5], ax, ay, az)

        k1 = deriv(s)
        k2 = deriv(tuple(si + 0.5 * dt * ki for si, ki in zip(s, k1)))
        k3 = deriv(tuple(si + 0.5 * dt * ki for si, ki in zip(s, k2)))
        k4 = deriv(tuple(si + dt * ki for si, ki in zip(s, k3)))
        return QuadState(*(si + dt / 6.0 * (a + 2 * b + 2 * c_ + d)
                           for si, a, b, c_, d in zip(s, k1, k2, k3, k4)))
    raise ValueError(f"unknown integrator {integrator!r}")


def project(s: QuadState) -> tuple[float, float, float]:
    """Planning-space projection: keep position, drop velocity."""
    return (s.px, s.py, s.pz)


def track(s: QuadState, ref_pos, ref_vel,
          gains: ControlConfig = DEFAULT_CONTROL) -> QuadControl:
    """Saturated PD law on relative position/velocity, inverted through the
    near-hover map; always returns in-limit controls."""
    ax = gains.kp * (ref_pos[0] - s.px) + gains.kd * (ref_vel[0] - s.vx)
    ay = gains.kp * (ref_pos[1] - s.py) + gains.kd * (ref_vel[1] - s.vy)
    az = gains.kp * (ref_pos[2] - s.pz) + gains.kd * (ref_vel[2] - s.vz)
    pitch = _clip(math.atan2(ax, GRAVITY), gains.angle_max)
    roll = _clip(math.atan2(-ay, GRAVITY), gains.angle_max)
    thrust = min(max(az + GRAVITY, gains.thrust_min), gains.thrust_max)
    return QuadControl(thrust=thrust, roll=roll, pitch=pitch)


def _clip(x: float, lim: float) -> float:
    return min(max(x, -lim), lim)
