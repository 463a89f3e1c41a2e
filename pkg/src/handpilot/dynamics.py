"""Fixed-step rigid-body quadrotor with an angle-mode cascade controller.

Frames and conventions
----------------------
World frame: x forward, y left, z up. Body frame matches at identity attitude.
The quaternion (w, x, y, z) rotates body vectors into the world frame; Euler
angles are extracted ZYX (yaw about z, pitch about y, roll about x), so a
positive pitch command tilts the thrust vector toward +x (forward motion) and
a positive roll command toward -y (rightward motion).

Controller
----------
Stick positions become attitude targets (angle mode): the outer loop converts
angle error to a body-rate setpoint with a proportional gain in 1/s; the inner
loop runs a rate PID per axis on rad/s errors whose output is normalized to
[-1, 1] and scaled by the per-axis torque limit. Yaw is rate-only. Integration
is semi-implicit Euler with per-step quaternion renormalization, which keeps
trajectories deterministic for identical inputs.

All numeric defaults here are plausible micro-quad values chosen so the
shipped gains track a 20 degree step cleanly; every one is configurable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .crsf import ChannelSet, TICK_CENTER, TICK_MAX, TICK_MIN

GRAVITY = 9.81

_SPAN_UP = TICK_MAX - TICK_CENTER  # 819
_SPAN_DOWN = TICK_CENTER - TICK_MIN  # 820
_THROTTLE_SPAN = TICK_MAX - TICK_MIN  # 1639


class SimulationFault(RuntimeError):
    """Raised when the state becomes non-finite; the simulation must halt."""


@dataclass(frozen=True)
class QuadParams:
    mass: float = 0.034  # kg
    inertia_diag: tuple[float, float, float] = (2e-5, 2e-5, 3.5e-5)  # kg m^2
    max_total_thrust: float = 0.8  # N
    max_tilt_cmd: float = 30.0  # degrees at full stick
    max_torque: tuple[float, float, float] = (0.004, 0.004, 0.002)  # N m
    linear_drag: float = 0.002  # N s/m
    gravity: float = GRAVITY

    def __post_init__(self):
        if self.mass <= 0:
            raise ValueError("mass must be positive")
        if any(i <= 0 for i in self.inertia_diag):
            raise ValueError("inertia components must be positive")
        if self.max_total_thrust <= self.mass * self.gravity:
            raise ValueError("max_total_thrust must exceed hover weight")

    @classmethod
    def from_mapping(cls, d: dict) -> "QuadParams":
        known = {f for f in cls.__dataclass_fields__}
        d = dict(d)
        for key in ("inertia_diag", "max_torque"):
            if key in d and isinstance(d[key], list):
                d[key] = tuple(d[key])
        return cls(**{k: v for k, v in d.items() if k in known})


@dataclass
class QuadState:
    position: tuple[float, float, float] = (0.0, 0.0, 0.0)
    velocity: tuple[float, float, float] = (0.0, 0.0, 0.0)
    attitude: tuple[float, float, float, float] = (1.0, 0.0, 0.0, 0.0)  # w, x, y, z
    angular_velocity: tuple[float, float, float] = (0.0, 0.0, 0.0)  # body, rad/s
    armed: bool = False
    time: float = 0.0

    def euler_deg(self) -> tuple[float, float, float]:
        """(roll, pitch, yaw) in degrees, ZYX extraction."""
        w, x, y, z = self.attitude
        roll = math.atan2(2 * (w * x + y * z), 1 - 2 * (x * x + y * y))
        sinp = 2 * (w * y - z * x)
        sinp = max(-1.0, min(1.0, sinp))
        pitch = math.asin(sinp)
        yaw = math.atan2(2 * (w * z + x * y), 1 - 2 * (y * y + z * z))
        return math.degrees(roll), math.degrees(pitch), math.degrees(yaw)


@dataclass
class AngleController:
    """Cascade gains plus the inner loop's integrator/derivative state.

    The mutable fields reset with reset(); construct one controller per
    session and never share it across threads.
    """

    angle_gain: float = 8.0  # 1/s, angle error -> rate setpoint
    rate_p: float = 0.08  # per rad/s of rate error, normalized output
    rate_i: float = 0.02
    rate_d: float = 0.002
    yaw_rate_max: float = 180.0  # deg/s at full stick
    integrator_limit: float = 25.0  # clamp on integrated rate error, rad/s * s

    _integral: list = field(default_factory=lambda: [0.0, 0.0, 0.0], repr=False,
                            init=False, compare=False)
    _prev_rate: list = field(default_factory=lambda: [0.0, 0.0, 0.0], repr=False,
                             init=False, compare=False)

    def __post_init__(self):
        if min(self.angle_gain, self.rate_p, self.rate_i, self.rate_d) < 0:
            raise ValueError("gains must be >= 0")

    def reset(self) -> None:
        self._integral = [0.0, 0.0, 0.0]
        self._prev_rate = [0.0, 0.0, 0.0]

    @classmethod
    def from_mapping(cls, d: dict) -> "AngleController":
        known = {"angle_gain", "rate_p", "rate_i", "rate_d", "yaw_rate_max", "integrator_limit"}
        return cls(**{k: v for k, v in d.items() if k in known})


def setpoints_from_channels(channels: ChannelSet, params: QuadParams,
                            ctrl: AngleController) -> tuple[float, float, float, float]:
    """(target_roll deg, target_pitch deg, yaw_rate deg/s, thrust fraction).

    Centered channels map piecewise-linearly so all three anchor ticks
    (172, 992, 1811) land exactly on -max, 0, +max.
    """
    def centered(tick: int) -> float:
        d = tick - TICK_CENTER
        n = d / _SPAN_UP if d >= 0 else d / _SPAN_DOWN
        return max(-1.0, min(1.0, n))

    roll = centered(channels[0]) * params.max_tilt_cmd
    pitch = centered(channels[1]) * params.max_tilt_cmd
    thrust = max(0.0, min(1.0, (channels[2] - TICK_MIN) / _THROTTLE_SPAN))
    yaw_rate = centered(channels[3]) * ctrl.yaw_rate_max
    return roll, pitch, yaw_rate, thrust


def trim_hover(params: QuadParams) -> float:
    """Thrust fraction that exactly balances weight."""
    frac = params.mass * params.gravity / params.max_total_thrust
    if frac >= 1.0:
        raise ValueError("hover infeasible: max_total_thrust <= mass * gravity")
    return frac


def _quat_normalize(q):
    w, x, y, z = q
    n = math.sqrt(w * w + x * x + y * y + z * z)
    return (w / n, x / n, y / n, z / n)


def _check_finite(state: QuadState) -> None:
    vals = (*state.position, *state.velocity, *state.attitude, *state.angular_velocity)
    if not all(math.isfinite(v) for v in vals):
        raise SimulationFault("non-finite state encountered")


def _rate_pid(ctrl: AngleController, axis: int, error: float, rate: float,
              dt: float) -> float:
    """Inner rate loop, rad/s in, normalized [-1, 1] out."""
    integral = ctrl._integral[axis] + error * dt
    lim = ctrl.integrator_limit
    integral = max(-lim, min(lim, integral))
    ctrl._integral[axis] = integral
    # derivative on measurement, not on setpoint
    d_meas = (rate - ctrl._prev_rate[axis]) / dt
    ctrl._prev_rate[axis] = rate
    out = ctrl.rate_p * error + ctrl.rate_i * integral - ctrl.rate_d * d_meas
    return max(-1.0, min(1.0, out))


def step_setpoints(state: QuadState, setpoints: tuple[float, float, float, float],
                   params: QuadParams, ctrl: AngleController, dt: float) -> QuadState:
    """One integration step driven by explicit attitude/thrust setpoints."""
    if not 0.0 < dt <= 0.01:
        raise ValueError("dt must be in (0, 0.01]")
    _check_finite(state)

    target_roll, target_pitch, yaw_rate_sp, thrust_frac = setpoints
    p, q_rate, r = state.angular_velocity

    if state.armed:
        roll, pitch, _ = state.euler_deg()
        rate_sp = (
            ctrl.angle_gain * math.radians(target_roll - roll),
            ctrl.angle_gain * math.radians(target_pitch - pitch),
            math.radians(yaw_rate_sp),
        )
        rates = (p, q_rate, r)
        torque = tuple(
            _rate_pid(ctrl, i, rate_sp[i] - rates[i], rates[i], dt) * params.max_torque[i]
            for i in range(3)
        )
        thrust = max(0.0, min(1.0, thrust_frac)) * params.max_total_thrust
    else:
        torque = (0.0, 0.0, 0.0)
        thrust = 0.0
        ctrl.reset()

    ix, iy, iz = params.inertia_diag
    p_dot = (torque[0] - (iz - iy) * q_rate * r) / ix
    q_dot = (torque[1] - (ix - iz) * p * r) / iy
    r_dot = (torque[2] - (iy - ix) * p * q_rate) / iz
    p += p_dot * dt
    q_rate += q_dot * dt
    r += r_dot * dt

    w, x, y, z = state.attitude
    dw = 0.5 * (-x * p - y * q_rate - z * r)
    dx = 0.5 * (w * p + y * r - z * q_rate)
    dy = 0.5 * (w * q_rate - x * r + z * p)
    dz = 0.5 * (w * r + x * q_rate - y * p)
    quat = _quat_normalize((w + dw * dt, x + dx * dt, y + dy * dt, z + dz * dt))

    # thrust along body z expressed in world coordinates
    qw, qx, qy, qz = quat
    fz_dir = (2 * (qx * qz + qw * qy), 2 * (qy * qz - qw * qx), 1 - 2 * (qx * qx + qy * qy))
    m = params.mass
    drag = params.linear_drag
    vx, vy, vz = state.velocity
    ax = (thrust * fz_dir[0] - drag * vx) / m
    ay = (thrust * fz_dir[1] - drag * vy) / m
    az = (thrust * fz_dir[2] - drag * vz) / m - params.gravity

    vx += ax * dt
    vy += ay * dt
    vz += az * dt
    px, py, pz = state.position
    px += vx * dt
    py += vy * dt
    pz += vz * dt

    # inelastic ground contact at z = 0
    if pz <= 0.0:
        pz = 0.0
        vx = vy = vz = 0.0
        p = q_rate = r = 0.0

    new_state = QuadState(
        position=(px, py, pz),
        velocity=(vx, vy, vz),
        attitude=quat,
        angular_velocity=(p, q_rate, r),
        armed=state.armed,
        time=state.time + dt,
    )
    _check_finite(new_state)
    return new_state


def step(state: QuadState, channels: ChannelSet, params: QuadParams,
         ctrl: AngleController, dt: float) -> QuadState:
    """One integration step driven by an RC channel set."""
    return step_setpoints(state, setpoints_from_channels(channels, params, ctrl),
                          params, ctrl, dt)
