"""Training course geometry and exercise scripting.

A course is a set of gates, vertical cylindrical obstacles, a landing pad,
and a bounding box. Gate passes are detected on position segments (never
point samples) so fast crossings are not missed; detection is directional
along the gate normal. The drone is treated as a sphere for collisions.

Ground contact counts as a collision only outside the landing pad, so the
stock courses start and finish the drone on the pad.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

COURSE_FORMAT = 1
DEFAULT_DRONE_RADIUS = 0.05

Vec3 = tuple[float, float, float]


def _sub(a: Vec3, b: Vec3) -> Vec3:
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def _dot(a: Vec3, b: Vec3) -> float:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def _cross(a: Vec3, b: Vec3) -> Vec3:
    return (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])


def _normalize(v: Vec3) -> Vec3:
    n = math.sqrt(_dot(v, v))
    if n == 0:
        raise ValueError("zero-length vector")
    return (v[0] / n, v[1] / n, v[2] / n)


@dataclass(frozen=True)
class Gate:
    center: Vec3
    normal: Vec3  # unit; passes count when crossing along this direction
    width: float
    height: float

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("gate dimensions must be positive")
        object.__setattr__(self, "normal", _normalize(self.normal))

    def plane_axes(self) -> tuple[Vec3, Vec3]:
        """(width axis, height axis) spanning the gate rectangle."""
        n = self.normal
        if abs(n[2]) < 0.99:
            u = _normalize(_cross((0.0, 0.0, 1.0), n))
        else:
            u = _normalize(_cross((1.0, 0.0, 0.0), n))
        v = _cross(n, u)
        return u, v


@dataclass(frozen=True)
class Obstacle:
    """Vertical cylinder standing on the ground."""

    center_xy: tuple[float, float]
    radius: float
    height: float

    def __post_init__(self):
        if self.radius <= 0 or self.height <= 0:
            raise ValueError("obstacle dimensions must be positive")


@dataclass(frozen=True)
class LandingPad:
    center_xy: tuple[float, float]
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("pad radius must be positive")


@dataclass(frozen=True)
class Bounds:
    min_corner: Vec3
    max_corner: Vec3

    def contains(self, p: Vec3) -> bool:
        return all(lo <= c <= hi for lo, c, hi in zip(self.min_corner, p, self.max_corner))


@dataclass(frozen=True)
class Course:
    gates: tuple[Gate, ...]
    obstacles: tuple[Obstacle, ...]
    landing_pad: LandingPad
    bounds: Bounds
    name: str = "unnamed"
    scripts: dict = field(default_factory=dict)


# Script steps. Durations and tolerances are seconds / meters.

@dataclass(frozen=True)
class HoldAltitude:
    z: float
    tolerance: float
    duration: float

    def __post_init__(self):
        if self.duration <= 0 or self.tolerance <= 0:
            raise ValueError("duration and tolerance must be positive")


@dataclass(frozen=True)
class TranslateTo:
    xy: tuple[float, float]
    tolerance: float

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")


@dataclass(frozen=True)
class RotateYaw:
    degrees: float
    direction: str  # "cw" or "ccw"

    def __post_init__(self):
        if self.degrees <= 0:
            raise ValueError("degrees must be positive")
        if self.direction not in ("cw", "ccw"):
            raise ValueError("direction must be 'cw' or 'ccw'")


@dataclass(frozen=True)
class PassGate:
    index: int


@dataclass(frozen=True)
class Land:
    pass


Step = HoldAltitude | TranslateTo | RotateYaw | PassGate | Land


@dataclass(frozen=True)
class ExerciseScript:
    name: str
    steps: tuple[Step, ...]


def check_gate_pass(p0: Vec3, p1: Vec3, gate: Gate) -> bool:
    """True iff segment p0->p1 crosses the gate plane along the normal and
    the crossing point lies inside the gate rectangle."""
    d0 = _dot(_sub(p0, gate.center), gate.normal)
    d1 = _dot(_sub(p1, gate.center), gate.normal)
    if not (d0 < 0.0 <= d1):
        return False
    t = d0 / (d0 - d1)
    hit = (p0[0] + t * (p1[0] - p0[0]),
           p0[1] + t * (p1[1] - p0[1]),
           p0[2] + t * (p1[2] - p0[2]))
    u, v = gate.plane_axes()
    rel = _sub(hit, gate.center)
    return abs(_dot(rel, u)) <= gate.width / 2 and abs(_dot(rel, v)) <= gate.height / 2


def check_collision(p: Vec3, drone_radius: float, course: Course) -> bool:
    """True iff the drone sphere hits an obstacle, the ground away from the
    landing pad, or leaves the course bounds."""
    if drone_radius <= 0:
        raise ValueError("drone_radius must be positive")
    if not course.bounds.contains(p):
        return True
    for obs in course.obstacles:
        dxy = math.hypot(p[0] - obs.center_xy[0], p[1] - obs.center_xy[1])
        if dxy <= obs.radius + drone_radius and p[2] - drone_radius <= obs.height and p[2] + drone_radius >= 0.0:
            return True
    if p[2] < drone_radius:
        pad = course.landing_pad
        if math.hypot(p[0] - pad.center_xy[0], p[1] - pad.center_xy[1]) > pad.radius:
            return True
    return False


class ScriptRunner:
    """Advances an exercise script against a stream of quad states.

    Progress is monotone: completed steps never revert. A collision at any
    point emits collision_failed and ends the exercise.
    """

    GROUND_Z = 1e-3

    def __init__(self, course: Course, script: ExerciseScript,
                 drone_radius: float = DEFAULT_DRONE_RADIUS):
        self.course = course
        self.script = script
        self.drone_radius = drone_radius
        self.index = 0
        self.status = "running"  # running | completed | failed
        self._hold_timer = 0.0
        self._yaw_accum = 0.0
        self._prev_pos: Vec3 | None = None
        self._prev_yaw: float | None = None

    def _reset_step_state(self) -> None:
        self._hold_timer = 0.0
        self._yaw_accum = 0.0

    def _step_done(self, step: Step, pos: Vec3, yaw: float, dt: float) -> bool:
        if isinstance(step, HoldAltitude):
            if abs(pos[2] - step.z) <= step.tolerance:
                self._hold_timer += dt
                return self._hold_timer >= step.duration
            self._hold_timer = 0.0
            return False
        if isinstance(step, TranslateTo):
            return math.hypot(pos[0] - step.xy[0], pos[1] - step.xy[1]) <= step.tolerance
        if isinstance(step, RotateYaw):
            if self._prev_yaw is not None:
                delta = yaw - self._prev_yaw
                while delta > 180.0:
                    delta -= 360.0
                while delta < -180.0:
                    delta += 360.0
                self._yaw_accum += delta
            signed = self._yaw_accum if step.direction == "ccw" else -self._yaw_accum
            return signed >= step.degrees
        if isinstance(step, PassGate):
            if self._prev_pos is None:
                return False
            return check_gate_pass(self._prev_pos, pos, self.course.gates[step.index])
        if isinstance(step, Land):
            pad = self.course.landing_pad
            on_pad = math.hypot(pos[0] - pad.center_xy[0], pos[1] - pad.center_xy[1]) <= pad.radius
            return on_pad and pos[2] <= self.GROUND_Z
        raise TypeError(f"unknown step {step!r}")

    def advance(self, quad_state, dt: float) -> list[dict]:
        """Feed one state sample; returns events emitted this sample."""
        if self.status != "running":
            return []
        pos = quad_state.position
        yaw = quad_state.euler_deg()[2]
        events: list[dict] = []

        if check_collision(pos, self.drone_radius, self.course):
            self.status = "failed"
            events.append({"type": "collision_failed", "t": quad_state.time,
                           "step": self.index})
            self._prev_pos, self._prev_yaw = pos, yaw
            return events

        # a completed step may leave the next one already satisfied
        while self.index < len(self.script.steps):
            step = self.script.steps[self.index]
            if not self._step_done(step, pos, yaw, dt):
                break
            events.append({"type": "step_completed", "step": self.index,
                           "t": quad_state.time})
            self.index += 1
            self._reset_step_state()
            if isinstance(step, (PassGate, RotateYaw)):
                break  # segment/rotation state must not double-count this sample

        if self.index >= len(self.script.steps):
            self.status = "completed"
            events.append({"type": "exercise_completed", "t": quad_state.time})

        self._prev_pos, self._prev_yaw = pos, yaw
        return events


def _step_to_dict(step: Step) -> dict:
    if isinstance(step, HoldAltitude):
        return {"kind": "hold_altitude", "z": step.z, "tolerance": step.tolerance,
                "duration": step.duration}
    if isinstance(step, TranslateTo):
        return {"kind": "translate_to", "xy": list(step.xy), "tolerance": step.tolerance}
    if isinstance(step, RotateYaw):
        return {"kind": "rotate_yaw", "degrees": step.degrees, "direction": step.direction}
    if isinstance(step, PassGate):
        return {"kind": "pass_gate", "index": step.index}
    if isinstance(step, Land):
        return {"kind": "land"}
    raise TypeError(f"unknown step {step!r}")


def _step_from_dict(d: dict) -> Step:
    kind = d["kind"]
    if kind == "hold_altitude":
        return HoldAltitude(z=d["z"], tolerance=d["tolerance"], duration=d["duration"])
    if kind == "translate_to":
        return TranslateTo(xy=tuple(d["xy"]), tolerance=d["tolerance"])
    if kind == "rotate_yaw":
        return RotateYaw(degrees=d["degrees"], direction=d["direction"])
    if kind == "pass_gate":
        return PassGate(index=d["index"])
    if kind == "land":
        return Land()
    raise ValueError(f"unknown step kind {kind!r}")


def course_to_dict(course: Course) -> dict:
    return {
        "format": COURSE_FORMAT,
        "name": course.name,
        "gates": [{"center": list(g.center), "normal": list(g.normal),
                   "width": g.width, "height": g.height} for g in course.gates],
        "obstacles": [{"center_xy": list(o.center_xy), "radius": o.radius,
                       "height": o.height} for o in course.obstacles],
        "landing_pad": {"center_xy": list(course.landing_pad.center_xy),
                        "radius": course.landing_pad.radius},
        "bounds": {"min": list(course.bounds.min_corner),
                   "max": list(course.bounds.max_corner)},
        "scripts": {name: [_step_to_dict(s) for s in script.steps]
                    for name, script in course.scripts.items()},
    }


def course_from_dict(d: dict) -> Course:
    if d.get("format") != COURSE_FORMAT:
        raise ValueError(f"unsupported course format {d.get('format')!r}")
    scripts = {name: ExerciseScript(name=name, steps=tuple(_step_from_dict(s) for s in steps))
               for name, steps in d.get("scripts", {}).items()}
    return Course(
        name=d.get("name", "unnamed"),
        gates=tuple(Gate(center=tuple(g["center"]), normal=tuple(g["normal"]),
                         width=g["width"], height=g["height"]) for g in d["gates"]),
        obstacles=tuple(Obstacle(center_xy=tuple(o["center_xy"]), radius=o["radius"],
                                 height=o["height"]) for o in d["obstacles"]),
        landing_pad=LandingPad(center_xy=tuple(d["landing_pad"]["center_xy"]),
                               radius=d["landing_pad"]["radius"]),
        bounds=Bounds(min_corner=tuple(d["bounds"]["min"]),
                      max_corner=tuple(d["bounds"]["max"])),
        scripts=scripts,
    )


def load_course(path: str | Path) -> Course:
    with open(path, "r", encoding="utf-8") as fh:
        return course_from_dict(json.load(fh))


def save_course(course: Course, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(course_to_dict(course), fh, indent=2, sort_keys=True)
        fh.write("\n")


def default_course() -> Course:
    """Stock track: takeoff pad, one 1 m gate, a pair of vertical obstacles
    to thread, then return and land."""
    track = ExerciseScript(name="track", steps=(
        HoldAltitude(z=1.0, tolerance=0.3, duration=1.5),
        PassGate(index=0),
        TranslateTo(xy=(3.5, 0.0), tolerance=0.4),
        TranslateTo(xy=(4.3, 0.0), tolerance=0.4),
        RotateYaw(degrees=170.0, direction="ccw"),
        TranslateTo(xy=(0.0, 0.0), tolerance=0.35),
        Land(),
    ))
    basics = ExerciseScript(name="basics", steps=(
        HoldAltitude(z=1.0, tolerance=0.3, duration=2.0),
        TranslateTo(xy=(1.5, 0.0), tolerance=0.35),
        TranslateTo(xy=(1.5, 1.0), tolerance=0.35),
        RotateYaw(degrees=90.0, direction="cw"),
        RotateYaw(degrees=90.0, direction="ccw"),
        TranslateTo(xy=(0.0, 0.0), tolerance=0.35),
        Land(),
    ))
    return Course(
        name="paper-track",
        gates=(Gate(center=(2.0, 0.0, 1.0), normal=(1.0, 0.0, 0.0), width=1.0, height=1.0),),
        obstacles=(Obstacle(center_xy=(3.5, 0.8), radius=0.15, height=2.5),
                   Obstacle(center_xy=(3.5, -0.8), radius=0.15, height=2.5)),
        landing_pad=LandingPad(center_xy=(0.0, 0.0), radius=0.4),
        bounds=Bounds(min_corner=(-1.0, -2.0, 0.0), max_corner=(5.0, 2.0, 3.0)),
        scripts={"track": track, "basics": basics},
    )
