"""Piloting session orchestration: input -> mapping -> link -> dynamics ->
course scoring, with recording and bitwise-reproducible replay.

The loop owns a virtual clock advancing in sim-rate ticks. Input sampling,
packet sends, and telemetry all run on integer tick schedules derived from
their rates, so a session is fully determined by (config, inputs, seed).
Live mode rate-locks the virtual clock to wall time; replay runs free.

Record files are newline-delimited JSON: one header line, one row per input
sample, one trailing summary line. Serialization is canonical (sorted keys,
shortest-round-trip floats) so write -> read -> write is byte-identical.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, replace
from pathlib import Path

from .configfile import load_config, section
from .course import Course, ScriptRunner, course_from_dict, course_to_dict, default_course, load_course
from .crsf import ChannelSet, TICK_CENTER, TICK_MIN, decode_rc_channels, decode_frame, encode_rc_frame
from .dynamics import AngleController, QuadParams, QuadState, step
from .link import LinkConfig, RadioLink, check_failsafe
from .mapping import ArmingState, ArmMode, ControllerState, MappingConfig, map_state, slew_limit, step_arming

RECORD_FORMAT = 1
FC_ARM_THRESHOLD = 1000  # ticks on channel 5
FAILSAFE_DISARM_MS = 1000.0


class InputEnded(Exception):
    """Raised by an input source that cannot produce further samples."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


@dataclass(frozen=True)
class SessionConfig:
    mapping: MappingConfig
    link: LinkConfig
    quad: QuadParams
    ctrl: AngleController
    course: Course
    script_name: str = "track"
    sim_rate: int = 1000
    telemetry_rate: int = 60
    input_rate: int = 100
    max_duration_s: float = 120.0
    drone_radius: float = 0.05
    offsets: tuple[float, float] = (0.0, 0.0)
    # the transmitter goes silent when input stops arriving for this long
    tx_staleness_ms: float = 250.0

    def __post_init__(self):
        if self.telemetry_rate > self.sim_rate:
            raise ValueError("telemetry_rate must not exceed sim_rate")
        if self.input_rate > self.sim_rate:
            raise ValueError("input_rate must not exceed sim_rate")
        if self.script_name not in self.course.scripts:
            raise ValueError(f"course has no script {self.script_name!r}")
        if self.mapping.channel_order != "AETR":
            raise ValueError("the simulated flight controller expects AETR channel order")

    @classmethod
    def defaults(cls, **overrides) -> "SessionConfig":
        base = dict(mapping=MappingConfig(), link=LinkConfig(), quad=QuadParams(),
                    ctrl=AngleController(), course=default_course())
        base.update(overrides)
        return cls(**base)

    def to_dict(self) -> dict:
        ctrl = self.ctrl
        return {
            "format": RECORD_FORMAT,
            "mapping": {
                "max_tilt_deg": self.mapping.max_tilt_deg,
                "deadzone": self.mapping.deadzone,
                "expo": self.mapping.expo,
                "slew_limit": self.mapping.slew_limit,
                "invert_pitch": self.mapping.invert_pitch,
                "invert_roll": self.mapping.invert_roll,
                "invert_yaw": self.mapping.invert_yaw,
                "channel_order": self.mapping.channel_order,
            },
            "link": {
                "packet_rate": self.link.packet_rate,
                "latency_ms": self.link.latency_ms,
                "loss_probability": self.link.loss_probability,
                "rng_seed": self.link.rng_seed,
                "failsafe_timeout_ms": self.link.failsafe_timeout_ms,
            },
            "quad": {
                "mass": self.quad.mass,
                "inertia_diag": list(self.quad.inertia_diag),
                "max_total_thrust": self.quad.max_total_thrust,
                "max_tilt_cmd": self.quad.max_tilt_cmd,
                "max_torque": list(self.quad.max_torque),
                "linear_drag": self.quad.linear_drag,
                "gravity": self.quad.gravity,
            },
            "ctrl": {
                "angle_gain": ctrl.angle_gain,
                "rate_p": ctrl.rate_p,
                "rate_i": ctrl.rate_i,
                "rate_d": ctrl.rate_d,
                "yaw_rate_max": ctrl.yaw_rate_max,
                "integrator_limit": ctrl.integrator_limit,
            },
            "session": {
                "script": self.script_name,
                "sim_rate": self.sim_rate,
                "telemetry_rate": self.telemetry_rate,
                "input_rate": self.input_rate,
                "max_duration_s": self.max_duration_s,
                "drone_radius": self.drone_radius,
                "offsets": list(self.offsets),
                "tx_staleness_ms": self.tx_staleness_ms,
            },
            "course": course_to_dict(self.course),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SessionConfig":
        if d.get("format") != RECORD_FORMAT:
            raise ValueError(f"unsupported config format {d.get('format')!r}")
        sess = d["session"]
        return cls(
            mapping=MappingConfig.from_mapping(d["mapping"]),
            link=LinkConfig.from_mapping(d["link"]),
            quad=QuadParams.from_mapping(d["quad"]),
            ctrl=AngleController.from_mapping(d["ctrl"]),
            course=course_from_dict(d["course"]),
            script_name=sess["script"],
            sim_rate=sess["sim_rate"],
            telemetry_rate=sess["telemetry_rate"],
            input_rate=sess["input_rate"],
            max_duration_s=sess["max_duration_s"],
            drone_radius=sess["drone_radius"],
            offsets=tuple(sess["offsets"]),
            tx_staleness_ms=sess["tx_staleness_ms"],
        )


def session_config_from_file(path: str | Path) -> SessionConfig:
    """Build a SessionConfig from a key/value config file.

    The `course` key names a course JSON file, resolved relative to the
    config file; it defaults to the built-in track. Schema in docs/formats.md.
    """
    path = Path(path)
    flat = load_config(path)
    course = default_course()
    if "course" in flat:
        course_path = Path(flat["course"])
        if not course_path.is_absolute():
            course_path = path.parent / course_path
        course = load_course(course_path)
    sess = section(flat, "session")
    extra = {}
    for key in ("script", "sim_rate", "telemetry_rate", "input_rate",
                "max_duration_s", "drone_radius", "tx_staleness_ms"):
        if key in sess:
            extra["script_name" if key == "script" else key] = sess[key]
    if "offsets" in sess:
        extra["offsets"] = tuple(sess["offsets"])
    return SessionConfig(
        mapping=MappingConfig.from_mapping(section(flat, "mapping")),
        link=LinkConfig.from_mapping(section(flat, "link")),
        quad=QuadParams.from_mapping(section(flat, "quad")),
        ctrl=AngleController.from_mapping(section(flat, "ctrl")),
        course=course,
        **extra,
    )


def _canonical(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


@dataclass
class SessionRecord:
    header: dict
    rows: list[dict]
    summary: dict

    def to_jsonl(self) -> str:
        lines = [_canonical(self.header)]
        lines.extend(_canonical(r) for r in self.rows)
        lines.append(_canonical(self.summary))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> "SessionRecord":
        lines = [json.loads(line) for line in text.splitlines() if line.strip()]
        if len(lines) < 2 or lines[0].get("kind") != "header" or lines[-1].get("kind") != "summary":
            raise ValueError("malformed session record")
        if lines[0].get("format") != RECORD_FORMAT:
            raise ValueError(f"unsupported record format {lines[0].get('format')!r}")
        return cls(header=lines[0], rows=lines[1:-1], summary=lines[-1])

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_jsonl(), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "SessionRecord":
        return cls.from_jsonl(Path(path).read_text(encoding="utf-8"))

    def config(self) -> SessionConfig:
        return SessionConfig.from_dict(self.header["config"])


class ScriptedInput:
    """Wraps fn(t_ms, feedback) -> ControllerState."""

    def __init__(self, fn):
        self._fn = fn

    def sample(self, t_ms: float, feedback: dict | None) -> ControllerState:
        return self._fn(t_ms, feedback)


class ReplayInput:
    """Feeds the controller samples stored in a session record."""

    def __init__(self, record: SessionRecord):
        self._by_t = {row["t_ms"]: row["input"] for row in record.rows}
        self._last_t = max(self._by_t) if self._by_t else 0.0

    def sample(self, t_ms: float, feedback: dict | None) -> ControllerState:
        if t_ms > self._last_t:
            raise InputEnded("replay_exhausted")
        d = self._by_t.get(t_ms)
        if d is None:
            raise InputEnded("replay_gap")
        return ControllerState(
            trigger=d["trigger"], tilt_pitch=d["tilt_pitch"], tilt_roll=d["tilt_roll"],
            thumbstick_x=d["thumbstick_x"], arm_button=d["arm_button"],
            timestamp_ms=d["timestamp_ms"],
        )


def _input_to_dict(s: ControllerState) -> dict:
    return {"trigger": s.trigger, "tilt_pitch": s.tilt_pitch, "tilt_roll": s.tilt_roll,
            "thumbstick_x": s.thumbstick_x, "arm_button": s.arm_button,
            "timestamp_ms": s.timestamp_ms}


def _quad_to_dict(q: QuadState) -> dict:
    return {"position": list(q.position), "velocity": list(q.velocity),
            "attitude": list(q.attitude), "angular_velocity": list(q.angular_velocity),
            "armed": q.armed, "time": q.time}


def _neutral_channels() -> ChannelSet:
    return ChannelSet.from_list([TICK_CENTER, TICK_CENTER, TICK_MIN, TICK_CENTER,
                                 TICK_MIN] + [TICK_CENTER] * 11)


def _failsafe_override(channels: ChannelSet) -> ChannelSet:
    values = [TICK_CENTER, TICK_CENTER, TICK_MIN, TICK_CENTER, channels[4]]
    values.extend(channels.channels[5:])
    return ChannelSet.from_list(values)


class _TickSchedule:
    """Integer tick schedule for an event running at `rate` under `sim_rate`."""

    def __init__(self, sim_rate: int, rate: int):
        self.sim_rate = sim_rate
        self.rate = rate
        self.count = 0
        self.next_tick = 0

    def due(self, tick: int) -> bool:
        if tick == self.next_tick:
            self.count += 1
            self.next_tick = (self.count * self.sim_rate) // self.rate
            return True
        return False


def run_session(cfg: SessionConfig, input_source, telemetry_sink=None,
                stop_flag=None, realtime: bool = False, speed: float = 1.0,
                started_unix_ms: int = 0) -> SessionRecord:
    """Run one session to termination and return its record.

    input_source provides .sample(t_ms, feedback) -> ControllerState and may
    raise InputEnded. telemetry_sink, when given, receives telemetry and event
    dicts as they are produced. stop_flag is an object with is_set().
    """
    course = cfg.course
    script = course.scripts[cfg.script_name]
    params = cfg.quad
    ctrl = replace(cfg.ctrl)
    radio = RadioLink(cfg.link)
    runner = ScriptRunner(course, script, cfg.drone_radius)
    pad = course.landing_pad
    quad = QuadState(position=(pad.center_xy[0], pad.center_xy[1], 0.0))

    sim_dt = 1.0 / cfg.sim_rate
    input_dt = 1.0 / cfg.input_rate
    ms_per_tick = 1000.0 / cfg.sim_rate
    max_ticks = int(cfg.max_duration_s * cfg.sim_rate)
    latency_ticks = round(cfg.link.latency_ms * cfg.sim_rate / 1000.0)

    input_sched = _TickSchedule(cfg.sim_rate, cfg.input_rate)
    send_sched = _TickSchedule(cfg.sim_rate, cfg.link.packet_rate)
    telemetry_sched = _TickSchedule(cfg.sim_rate, cfg.telemetry_rate)

    arming = ArmingState()
    last_input = ControllerState()
    last_fresh_ms: float | None = None
    prev_tx: ChannelSet | None = None
    tx_channels = _neutral_channels()
    fc_channels = _neutral_channels()
    pending: list[tuple[int, bytes]] = []  # (arrival_tick, frame)
    last_arrival_ms = 0.0
    fs_active = False
    fs_since_ms = 0.0
    fs_disarmed = False
    fc_arm_latch = False

    rows: list[dict] = []
    event_buffer: list[dict] = []
    telemetry_frames = 0
    events_total: dict[str, int] = {}
    status = "running"
    end_reason = ""

    def emit_event(ev: dict) -> None:
        event_buffer.append(ev)
        events_total[ev["type"]] = events_total.get(ev["type"], 0) + 1
        if telemetry_sink is not None:
            envelope = {k: v for k, v in ev.items() if k != "type"}
            telemetry_sink({"type": "event", "event": ev["type"], **envelope})

    wall_start = time.monotonic()
    tick = 0
    while tick < max_ticks:
        t_ms = tick * ms_per_tick

        if stop_flag is not None and stop_flag.is_set():
            status = "stopped"
            end_reason = "stop_command"
            break

        input_due = input_sched.due(tick)
        if input_due:
            feedback = {
                "position": quad.position,
                "velocity": quad.velocity,
                "euler_deg": quad.euler_deg(),
                "armed": quad.armed,
                "exercise_step": runner.index,
                "exercise_status": runner.status,
            }
            try:
                sampled = input_source.sample(t_ms, feedback)
            except InputEnded as exc:
                status = "disconnected" if exc.reason == "input_disconnect" else "ended"
                end_reason = exc.reason
                emit_event({"type": "input_ended", "reason": exc.reason, "t_ms": t_ms})
                break
            if sampled is not None:
                last_input = replace(sampled, timestamp_ms=t_ms)
                last_fresh_ms = t_ms
            arming = step_arming(arming, last_input, link_ok=not fs_active)
            target = map_state(last_input, cfg.mapping, cfg.offsets,
                               armed=arming.mode is ArmMode.ARMED)
            tx_channels = (slew_limit(prev_tx, target, input_dt, cfg.mapping.slew_limit)
                           if prev_tx is not None else target)
            prev_tx = tx_channels

        if send_sched.due(tick):
            # the transmitter only radiates while control input keeps arriving
            transmitting = (last_fresh_ms is not None
                            and t_ms - last_fresh_ms <= cfg.tx_staleness_ms)
            if transmitting:
                delivery = radio.transmit(encode_rc_frame(tx_channels), t_ms)
                if delivery is not None:
                    pending.append((tick + latency_ticks, delivery.frame))

        while pending and pending[0][0] <= tick:
            arrival_tick, frame = pending.pop(0)
            fc_channels = decode_rc_channels(decode_frame(frame))
            last_arrival_ms = arrival_tick * ms_per_tick
            if fs_active:
                fs_active = False
                fs_disarmed = False
                emit_event({"type": "link_restored", "t_ms": t_ms})

        if not fs_active and check_failsafe(last_arrival_ms, t_ms, cfg.link):
            fs_active = True
            fs_since_ms = t_ms
            emit_event({"type": "link_failsafe", "t_ms": t_ms})

        effective = fc_channels
        if fs_active:
            effective = _failsafe_override(fc_channels)
            if not fs_disarmed and t_ms - fs_since_ms >= FAILSAFE_DISARM_MS:
                fs_disarmed = True
                fc_arm_latch = True
                emit_event({"type": "failsafe_disarm", "t_ms": t_ms})

        arm_cmd = effective[4] >= FC_ARM_THRESHOLD
        if fc_arm_latch:
            quad.armed = False
            if not arm_cmd:
                fc_arm_latch = False
        else:
            quad.armed = arm_cmd

        quad = step(quad, effective, params, ctrl, sim_dt)

        for ev in runner.advance(quad, sim_dt):
            emit_event({**ev, "t_ms": t_ms})

        if telemetry_sched.due(tick):
            telemetry_frames += 1
            if telemetry_sink is not None:
                roll, pitch, yaw = quad.euler_deg()
                telemetry_sink({
                    "type": "telemetry",
                    "t_ms": t_ms,
                    "quad": {"position": list(quad.position),
                             "velocity": list(quad.velocity),
                             "euler_deg": [roll, pitch, yaw],
                             "armed": quad.armed},
                    "channels": list(tx_channels.channels),
                    "link": {"lq": radio.stats.lq, "rssi": radio.stats.simulated_rssi,
                             "failsafe": fs_active},
                    "arming": arming.mode.value,
                    "exercise": {"script": cfg.script_name, "step": runner.index,
                                 "total": len(script.steps), "status": runner.status},
                })

        if input_due:
            rows.append({
                "kind": "row",
                "t_ms": t_ms,
                "input": _input_to_dict(last_input),
                "channels": list(tx_channels.channels),
                "quad": _quad_to_dict(quad),
                "arming": arming.mode.value,
                "link": {"lq": radio.stats.lq, "rssi": radio.stats.simulated_rssi,
                         "failsafe": fs_active},
                "events": event_buffer,
            })
            event_buffer = []

        if runner.status != "running":
            status = runner.status
            end_reason = "exercise_" + runner.status
            break

        tick += 1

        if realtime:
            wall_target = wall_start + (tick * sim_dt) / speed
            delay = wall_target - time.monotonic()
            if delay > 0.0005:
                time.sleep(delay)
    else:
        status = "timeout"
        end_reason = "max_duration"

    duration_ms = tick * ms_per_tick
    summary = {
        "kind": "summary",
        "status": status,
        "end_reason": end_reason,
        "duration_ms": duration_ms,
        "rows": len(rows),
        "telemetry_frames": telemetry_frames,
        "packets_sent": radio.stats.sent_total,
        "packets_delivered": radio.stats.delivered_total,
        "events": dict(sorted(events_total.items())),
        "exercise_step": runner.index,
        "exercise_steps_total": len(script.steps),
        "final_position": list(quad.position),
    }
    header = {"kind": "header", "format": RECORD_FORMAT,
              "started_unix_ms": started_unix_ms, "config": cfg.to_dict()}
    return SessionRecord(header=header, rows=rows, summary=summary)


def replay_session(record: SessionRecord, telemetry_sink=None,
                   realtime: bool = False, speed: float = 1.0) -> SessionRecord:
    """Re-run a recorded session through the full pipeline."""
    cfg = record.config()
    return run_session(cfg, ReplayInput(record), telemetry_sink=telemetry_sink,
                       realtime=realtime, speed=speed,
                       started_unix_ms=record.header.get("started_unix_ms", 0))
