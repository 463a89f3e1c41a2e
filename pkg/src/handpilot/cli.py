"""Command-line entry points.

Subcommands: serve, replay, crsf inspect|gen, map simulate, ueq score.
Bind address and config path honor the HANDPILOT_BIND / HANDPILOT_CONFIG
environment variables; explicit flags win. Report paths write figures and a
CSV next to each other.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from pathlib import Path

from .crsf import (
    ChannelSet,
    FrameParser,
    TICK_CENTER,
    TICK_MIN,
    TICK_MAX,
    FRAMETYPE_LINK_STATISTICS,
    FRAMETYPE_RC_CHANNELS_PACKED,
    decode_link_statistics,
    decode_rc_channels,
    encode_rc_frame,
)
from .mapping import ArmingState, ArmMode, ControllerState, MappingConfig, map_state, slew_limit, step_arming
from .session import SessionConfig, SessionRecord, replay_session, session_config_from_file
from .ueq import format_scales_table, load_responses_csv, score


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 1


def _parse_bind(text: str) -> tuple[str, int]:
    host, _, port = text.rpartition(":")
    if not host or not port.isdigit():
        raise ValueError(f"bind address must be host:port, got {text!r}")
    return host, int(port)


# -- serve -----------------------------------------------------------------

def cmd_serve(args) -> int:
    from .server import SessionServer

    config_path = args.config or os.environ.get("HANDPILOT_CONFIG")
    bind = args.bind or os.environ.get("HANDPILOT_BIND") or "127.0.0.1:8765"
    try:
        host, port = _parse_bind(bind)
        cfg = session_config_from_file(config_path) if config_path else SessionConfig.defaults()
    except (OSError, ValueError) as exc:
        return _fail(str(exc))
    server = SessionServer(cfg, host=host, port=port, speed=args.speed,
                           record_dir=args.record_dir)
    try:
        host, port = server.start()
    except OSError as exc:
        return _fail(f"cannot bind {host}:{port}: {exc}")
    print(f"listening on {host}:{port} (course {cfg.course.name!r}, "
          f"script {cfg.script_name!r})", flush=True)
    try:
        server.wait()
    except KeyboardInterrupt:
        pass
    finally:
        server.stop()
    return 0


# -- replay ----------------------------------------------------------------

def format_summary(summary: dict) -> str:
    events = ", ".join(f"{k}={v}" for k, v in summary["events"].items()) or "none"
    pos = summary["final_position"]
    return "\n".join([
        f"status: {summary['status']} ({summary['end_reason']})",
        f"duration: {summary['duration_ms']:.0f} ms",
        f"rows: {summary['rows']}, telemetry frames: {summary['telemetry_frames']}",
        f"packets: {summary['packets_sent']} sent, {summary['packets_delivered']} delivered",
        f"events: {events}",
        f"exercise: step {summary['exercise_step']}/{summary['exercise_steps_total']}",
        f"final position: [{pos[0]:.3f}, {pos[1]:.3f}, {pos[2]:.3f}]",
    ])


def cmd_replay(args) -> int:
    try:
        record = SessionRecord.load(args.record)
    except (OSError, ValueError) as exc:
        return _fail(str(exc))
    replayed = replay_session(record, realtime=args.realtime, speed=args.speed)
    print(format_summary(replayed.summary))
    mismatched = sum(1 for a, b in zip(record.rows, replayed.rows)
                     if a["quad"] != b["quad"])
    if mismatched:
        return _fail(f"replay diverged from the record on {mismatched} rows")
    if args.report_dir:
        from .report import render_replay_report
        for path in render_replay_report(replayed, args.report_dir):
            print(f"wrote {path}")
    return 0


# -- crsf ------------------------------------------------------------------

def cmd_crsf_inspect(args) -> int:
    try:
        data = Path(args.file).read_bytes()
    except OSError as exc:
        return _fail(str(exc))
    parser = FrameParser()
    frames = parser.feed(data)
    for i, frame in enumerate(frames):
        raw = frame.to_bytes()
        print(f"frame {i}: type=0x{frame.frame_type:02X} len={frame.frame_length} "
              f"crc=0x{frame.crc:02X}")
        print(f"  hex: {raw.hex(' ')}")
        if frame.frame_type == FRAMETYPE_RC_CHANNELS_PACKED:
            channels = decode_rc_channels(frame)
            print(f"  channels: {list(channels.channels)}")
        elif frame.frame_type == FRAMETYPE_LINK_STATISTICS:
            stats = decode_link_statistics(frame)
            print(f"  link: rssi={stats.uplink_rssi} dBm lq={stats.link_quality}% "
                  f"snr={stats.uplink_snr} dB rate={stats.active_packet_rate} Hz")
    print(f"{len(frames)} frame(s), {parser.crc_error_count} CRC error(s), "
          f"{parser.bytes_discarded} byte(s) discarded")
    return 0


def cmd_crsf_gen(args) -> int:
    try:
        parts = [int(v) for v in args.channels.split(",")]
        if len(parts) != 4:
            raise ValueError("expected exactly 4 channel values (a,e,t,r)")
        arm = TICK_MAX if args.armed else TICK_MIN
        channels = ChannelSet.from_list(parts + [arm] + [TICK_CENTER] * 11)
    except ValueError as exc:
        return _fail(str(exc))
    print(encode_rc_frame(channels).hex(" "))
    return 0


# -- map -------------------------------------------------------------------

def cmd_map_simulate(args) -> int:
    cfg = MappingConfig()
    if args.config:
        from .configfile import load_config, section
        try:
            cfg = MappingConfig.from_mapping(section(load_config(args.config), "mapping"))
        except (OSError, ValueError) as exc:
            return _fail(str(exc))
    offsets = (0.0, 0.0)
    if args.offsets:
        try:
            p, r = (float(v) for v in args.offsets.split(","))
            offsets = (p, r)
        except ValueError:
            return _fail("offsets must be 'pitch,roll' in degrees")

    expected = ["timestamp_ms", "trigger", "tilt_pitch", "tilt_roll",
                "thumbstick_x", "arm_button"]
    try:
        fh = open(args.input, "r", encoding="utf-8", newline="")
    except OSError as exc:
        return _fail(str(exc))
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != expected:
            return _fail(f"expected header {','.join(expected)!r}")
        arming = ArmingState()
        prev = None
        prev_t = None
        print("t_ms,mode," + ",".join(f"ch{i}" for i in range(1, 17)))
        for lineno, row in enumerate(reader, 2):
            if not row:
                continue
            try:
                state = ControllerState(
                    timestamp_ms=float(row[0]), trigger=float(row[1]),
                    tilt_pitch=float(row[2]), tilt_roll=float(row[3]),
                    thumbstick_x=float(row[4]),
                    arm_button=row[5].strip().lower() in ("1", "true", "yes"),
                )
            except (IndexError, ValueError) as exc:
                return _fail(f"{args.input}:{lineno}: {exc}")
            arming = step_arming(arming, state, link_ok=True)
            target = map_state(state, cfg, offsets, armed=arming.mode is ArmMode.ARMED)
            if prev is not None and prev_t is not None and state.timestamp_ms > prev_t:
                dt = (state.timestamp_ms - prev_t) / 1000.0
                target = slew_limit(prev, target, dt, cfg.slew_limit)
            prev, prev_t = target, state.timestamp_ms
            print(f"{state.timestamp_ms:g},{arming.mode.value},"
                  + ",".join(str(v) for v in target.channels))
    return 0


# -- ueq -------------------------------------------------------------------

def cmd_ueq_score(args) -> int:
    try:
        responses = load_responses_csv(args.csv, recode=args.recode)
        scales = score(responses)
    except (OSError, ValueError) as exc:
        return _fail(str(exc))
    print(format_scales_table(scales))
    if args.report_dir:
        from .report import render_ueq_report
        for path in render_ueq_report(scales, args.report_dir):
            print(f"wrote {path}")
    return 0


# -- parser ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="handpilot",
                                     description="handheld-controller drone "
                                                 "training toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the live session service")
    p.add_argument("--config", help="session config file (or HANDPILOT_CONFIG)")
    p.add_argument("--bind", help="host:port (or HANDPILOT_BIND; default 127.0.0.1:8765)")
    p.add_argument("--speed", type=float, default=1.0, help="simulation speed multiplier")
    p.add_argument("--record-dir", help="directory for finished session records")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("replay", help="re-run a recorded session")
    p.add_argument("record", help="session record (.jsonl)")
    p.add_argument("--speed", type=float, default=1.0)
    p.add_argument("--realtime", action="store_true",
                   help="pace the replay instead of running it flat out")
    p.add_argument("--report-dir", help="write figures and rows.csv here")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("crsf", help="wire-format tools")
    crsf_sub = p.add_subparsers(dest="crsf_command", required=True)
    pi = crsf_sub.add_parser("inspect", help="decode frames from a raw byte capture")
    pi.add_argument("file")
    pi.set_defaults(func=cmd_crsf_inspect)
    pg = crsf_sub.add_parser("gen", help="print an encoded RC frame as hex")
    pg.add_argument("--channels", required=True, help="a,e,t,r tick values")
    pg.add_argument("--armed", action="store_true", help="set the arm channel high")
    pg.set_defaults(func=cmd_crsf_gen)

    p = sub.add_parser("map", help="channel-mapping tools")
    map_sub = p.add_subparsers(dest="map_command", required=True)
    pm = map_sub.add_parser("simulate", help="replay controller CSV rows through the mapper")
    pm.add_argument("--input", required=True, help="controller state CSV")
    pm.add_argument("--config", help="config file providing mapping.* keys")
    pm.add_argument("--offsets", help="calibration offsets 'pitch,roll' in degrees")
    pm.set_defaults(func=cmd_map_simulate)

    p = sub.add_parser("ueq", help="questionnaire scoring")
    ueq_sub = p.add_subparsers(dest="ueq_command", required=True)
    pu = ueq_sub.add_parser("score", help="score a responses CSV")
    pu.add_argument("csv")
    pu.add_argument("--recode", action="store_true",
                    help="input uses the raw 1..7 scale")
    pu.add_argument("--report-dir", help="write the scale chart and CSV here")
    pu.set_defaults(func=cmd_ueq_score)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
