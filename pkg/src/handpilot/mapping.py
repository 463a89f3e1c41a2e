"""Handheld-controller state to RC channel mapping.

Control principle: trigger drives throttle, hand tilt drives pitch and roll,
the thumbstick drives yaw. Adds the plumbing a real transmitter needs around
that: neutral calibration, deadzone/expo shaping, slew limiting, and an arming
state machine that refuses to arm with the trigger raised.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .crsf import ChannelSet, TICK_CENTER, TICK_MAX, TICK_MIN

# Trigger must be below this fraction for arming transitions.
ARM_TRIGGER_MAX = 0.05

# Half-span used for centered axes; full deflection clamps into 172..1811.
_HALF_SPAN = 819.5
_THROTTLE_SPAN = TICK_MAX - TICK_MIN  # 1639

CHANNEL_ORDERS = {
    "AETR": ("roll", "pitch", "throttle", "yaw"),
    "TAER": ("throttle", "roll", "pitch", "yaw"),
}


class ArmMode(enum.Enum):
    DISARMED = "disarmed"
    ARMED = "armed"
    FAILSAFE = "failsafe"


@dataclass(frozen=True)
class ControllerState:
    """Instantaneous handheld-controller inputs."""

    trigger: float = 0.0  # 0..1
    tilt_pitch: float = 0.0  # degrees, forward positive
    tilt_roll: float = 0.0  # degrees, right positive
    thumbstick_x: float = 0.0  # -1..1
    arm_button: bool = False
    timestamp_ms: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.trigger <= 1.0:
            raise ValueError(f"trigger {self.trigger} outside 0..1")
        if abs(self.thumbstick_x) > 1.0:
            raise ValueError(f"thumbstick_x {self.thumbstick_x} outside -1..1")
        if not (math.isfinite(self.tilt_pitch) and math.isfinite(self.tilt_roll)):
            raise ValueError("tilt angles must be finite")


@dataclass(frozen=True)
class MappingConfig:
    max_tilt_deg: float = 30.0  # tilt producing full deflection
    deadzone: float = 0.05
    expo: float = 0.3
    slew_limit: float = 8000.0  # ticks per second
    invert_pitch: bool = False
    invert_roll: bool = False
    invert_yaw: bool = False
    channel_order: str = "AETR"

    def __post_init__(self):
        if self.max_tilt_deg <= 0:
            raise ValueError("max_tilt_deg must be positive")
        if not 0.0 <= self.deadzone < 0.5:
            raise ValueError("deadzone outside [0, 0.5)")
        if not 0.0 <= self.expo < 1.0:
            raise ValueError("expo outside [0, 1)")
        if self.channel_order not in CHANNEL_ORDERS:
            raise ValueError(f"unknown channel_order {self.channel_order!r}")

    @classmethod
    def from_mapping(cls, d: dict) -> "MappingConfig":
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in d.items() if k in known})


@dataclass(frozen=True)
class ArmingState:
    mode: ArmMode = ArmMode.DISARMED
    last_transition_ms: float = 0.0
    last_button: bool = False  # previous sample, for edge detection


class InsufficientDataError(ValueError):
    pass


def calibrate_neutral(samples: list[ControllerState]) -> tuple[float, float]:
    """Per-axis mean tilt over at-rest samples; subtracted by map_state."""
    if len(samples) < 10:
        raise InsufficientDataError(f"need at least 10 samples, got {len(samples)}")
    n = len(samples)
    return (sum(s.tilt_pitch for s in samples) / n,
            sum(s.tilt_roll for s in samples) / n)


def shape_axis(x: float, deadzone: float = 0.0, expo: float = 0.0) -> float:
    """Deadzone rescale then cubic expo blend; odd, endpoint-preserving."""
    mag = abs(x)
    if mag <= deadzone:
        return 0.0
    y = (mag - deadzone) / (1.0 - deadzone)
    z = (1.0 - expo) * y + expo * y ** 3
    return math.copysign(z, x)


def _round_half_away(x: float) -> int:
    return math.floor(x + 0.5) if x >= 0 else math.ceil(x - 0.5)


def _clamp(x: float, lo: float, hi: float) -> float:
    return lo if x < lo else hi if x > hi else x


def _centered_tick(value: float) -> int:
    tick = TICK_CENTER + _round_half_away(value * _HALF_SPAN)
    return int(_clamp(tick, TICK_MIN, TICK_MAX))


def map_state(state: ControllerState, cfg: MappingConfig,
              offsets: tuple[float, float] = (0.0, 0.0), armed: bool = False) -> ChannelSet:
    """Map one controller sample to 16 channels.

    Channel order follows cfg.channel_order for the first four; channel 5
    carries arming (172 disarmed / 1811 armed); the rest sit at center.
    """
    pitch_norm = _clamp((state.tilt_pitch - offsets[0]) / cfg.max_tilt_deg, -1.0, 1.0)
    roll_norm = _clamp((state.tilt_roll - offsets[1]) / cfg.max_tilt_deg, -1.0, 1.0)
    yaw_norm = _clamp(state.thumbstick_x, -1.0, 1.0)
    if cfg.invert_pitch:
        pitch_norm = -pitch_norm
    if cfg.invert_roll:
        roll_norm = -roll_norm
    if cfg.invert_yaw:
        yaw_norm = -yaw_norm

    axis = {
        "roll": _centered_tick(shape_axis(roll_norm, cfg.deadzone, cfg.expo)),
        "pitch": _centered_tick(shape_axis(pitch_norm, cfg.deadzone, cfg.expo)),
        "yaw": _centered_tick(shape_axis(yaw_norm, cfg.deadzone, cfg.expo)),
        "throttle": TICK_MIN + _round_half_away(_clamp(state.trigger, 0.0, 1.0) * _THROTTLE_SPAN),
    }
    channels = [axis[name] for name in CHANNEL_ORDERS[cfg.channel_order]]
    channels.append(TICK_MAX if armed else TICK_MIN)
    channels.extend([TICK_CENTER] * 11)
    return ChannelSet(channels=tuple(channels))


def step_arming(arming: ArmingState, state: ControllerState, link_ok: bool) -> ArmingState:
    """Advance the arming state machine for one controller sample.

    The arm button toggles on its rising edge. Arming from disarmed requires
    the trigger low; link loss forces failsafe, which clears to disarmed only
    once the link is back and the trigger is low.
    """
    pressed = state.arm_button and not arming.last_button
    mode = arming.mode
    if not link_ok:
        new_mode = ArmMode.FAILSAFE
    elif mode is ArmMode.FAILSAFE:
        new_mode = ArmMode.DISARMED if state.trigger < ARM_TRIGGER_MAX else ArmMode.FAILSAFE
    elif mode is ArmMode.DISARMED:
        new_mode = ArmMode.ARMED if pressed and state.trigger < ARM_TRIGGER_MAX else ArmMode.DISARMED
    else:  # ARMED
        new_mode = ArmMode.DISARMED if pressed else ArmMode.ARMED
    return ArmingState(
        mode=new_mode,
        last_transition_ms=state.timestamp_ms if new_mode is not mode else arming.last_transition_ms,
        last_button=state.arm_button,
    )


def slew_limit(prev: ChannelSet, target: ChannelSet, dt: float, limit: float) -> ChannelSet:
    """Move each channel toward its target by at most limit*dt ticks."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    max_step = math.floor(limit * dt)
    out = []
    for p, t in zip(prev.channels, target.channels):
        d = t - p
        if abs(d) <= max_step:
            out.append(t)
        else:
            out.append(p + max_step if d > 0 else p - max_step)
    return ChannelSet(channels=tuple(out))
