"""Deterministic scripted pilot used by the session tests and the golden
record. Flies waypoint phases keyed off the exercise step index in the
session feedback, the way a human would watch the HUD."""

import math

from handpilot.dynamics import QuadParams, trim_hover
from handpilot.mapping import ControllerState


def clamp(x, lo, hi):
    return lo if x < lo else hi if x > hi else x


class WaypointPilot:
    """Arms, takes off, and works through the stock "track" script."""

    KP = 12.0  # deg of tilt per m of position error
    KD = 10.0  # deg per m/s
    TILT_MAX = 10.0
    ERR_CAP = 0.7  # m; long legs cruise instead of diving at the target
    KZ = 0.45  # trigger per m of altitude error
    KVZ = 0.25  # trigger per m/s of climb rate

    def __init__(self, params: QuadParams | None = None, cruise_z: float = 1.0):
        self.hover_trigger = trim_hover(params or QuadParams())
        self.cruise_z = cruise_z
        self.silence_after_ms = None  # set to simulate the transmitter dying

    def _xy_hold(self, target_xy, feedback):
        x, y, _ = feedback["position"]
        vx, vy, _ = feedback["velocity"]
        yaw = math.radians(feedback["euler_deg"][2])
        ex, ey = target_xy[0] - x, target_xy[1] - y
        err = math.hypot(ex, ey)
        if err > self.ERR_CAP:
            ex, ey = ex * self.ERR_CAP / err, ey * self.ERR_CAP / err
        cos_y, sin_y = math.cos(yaw), math.sin(yaw)
        ex_b = cos_y * ex + sin_y * ey
        ey_b = -sin_y * ex + cos_y * ey
        vx_b = cos_y * vx + sin_y * vy
        vy_b = -sin_y * vx + cos_y * vy
        pitch = clamp(self.KP * ex_b - self.KD * vx_b, -self.TILT_MAX, self.TILT_MAX)
        roll = clamp(-(self.KP * ey_b - self.KD * vy_b), -self.TILT_MAX, self.TILT_MAX)
        return pitch, roll

    def _altitude_trigger(self, target_z, feedback):
        z = feedback["position"][2]
        vz = feedback["velocity"][2]
        return clamp(self.hover_trigger + self.KZ * (target_z - z) - self.KVZ * vz, 0.0, 0.75)

    def sample(self, t_ms, feedback):
        if self.silence_after_ms is not None and t_ms >= self.silence_after_ms:
            return None

        step = feedback["exercise_step"]
        armed = feedback["armed"]
        z = feedback["position"][2]

        # arm with the trigger down, then keep the button released
        if not armed and t_ms < 400.0:
            return ControllerState(trigger=0.0, arm_button=100.0 <= t_ms < 300.0,
                                   timestamp_ms=t_ms)

        trigger = self._altitude_trigger(self.cruise_z, feedback)
        pitch = roll = 0.0
        stick = 0.0

        if step == 0:  # hold altitude over the pad
            pitch, roll = self._xy_hold((0.0, 0.0), feedback)
        elif step == 1:  # through the gate at x=2
            pitch, roll = self._xy_hold((2.6, 0.0), feedback)
        elif step == 2:
            pitch, roll = self._xy_hold((3.5, 0.0), feedback)
        elif step == 3:
            pitch, roll = self._xy_hold((4.3, 0.0), feedback)
        elif step == 4:  # rotate in place
            pitch, roll = self._xy_hold((4.3, 0.0), feedback)
            stick = 0.5
        elif step == 5:  # head home
            pitch, roll = self._xy_hold((0.0, 0.0), feedback)
        else:  # land
            pitch, roll = self._xy_hold((0.0, 0.0), feedback)
            trigger = self._altitude_trigger(0.0, feedback)
            if z < 0.12:
                trigger = 0.0

        return ControllerState(trigger=trigger, tilt_pitch=pitch, tilt_roll=roll,
                               thumbstick_x=stick, arm_button=False, timestamp_ms=t_ms)


class NeutralPilot:
    """Arms and hovers; optionally goes silent at a given time."""

    def __init__(self, silence_after_ms=None, cruise_z=1.0):
        self._inner = WaypointPilot(cruise_z=cruise_z)
        self._inner.silence_after_ms = silence_after_ms

    def sample(self, t_ms, feedback):
        if self._inner.silence_after_ms is not None and t_ms >= self._inner.silence_after_ms:
            return None
        step_feedback = dict(feedback)
        step_feedback["exercise_step"] = 0  # always altitude-hold behaviour
        return self._inner.sample(t_ms, step_feedback)


class SilentPilot:
    """Never produces a sample: the transmitter is off."""

    def sample(self, t_ms, feedback):
        return None
