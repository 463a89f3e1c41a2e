"""Report rendering: figures plus machine-readable CSV next to them.

Replay reports show the flown trajectory over the course geometry, the
altitude profile with events, and the transmitted channels. Questionnaire
reports chart the scale means with SD bars. All figures render headless.
"""

from __future__ import annotations

import csv
from pathlib import Path

from .course import Course
from .session import SessionRecord
from .ueq import UeqScales


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def _write_rows_csv(record: SessionRecord, path: Path) -> None:
    fields = ["t_ms", "x", "y", "z", "vx", "vy", "vz", "armed",
              "ch_roll", "ch_pitch", "ch_throttle", "ch_yaw", "ch_arm",
              "lq", "rssi", "failsafe", "events"]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(fields)
        for row in record.rows:
            quad = row["quad"]
            writer.writerow([
                row["t_ms"],
                *quad["position"],
                *quad["velocity"],
                int(quad["armed"]),
                *row["channels"][:5],
                row["link"]["lq"],
                row["link"]["rssi"],
                int(row["link"]["failsafe"]),
                ";".join(e["type"] for e in row["events"]),
            ])


def _draw_course_topdown(ax, course: Course) -> None:
    bounds = course.bounds
    ax.add_patch(_pyplot().Rectangle(
        (bounds.min_corner[0], bounds.min_corner[1]),
        bounds.max_corner[0] - bounds.min_corner[0],
        bounds.max_corner[1] - bounds.min_corner[1],
        fill=False, edgecolor="gray", linestyle="--", label="bounds"))
    for gate in course.gates:
        u, _ = gate.plane_axes()
        half = gate.width / 2
        ax.plot([gate.center[0] - u[0] * half, gate.center[0] + u[0] * half],
                [gate.center[1] - u[1] * half, gate.center[1] + u[1] * half],
                color="tab:green", linewidth=3, label="gate")
    for obs in course.obstacles:
        ax.add_patch(_pyplot().Circle(obs.center_xy, obs.radius,
                                      color="tab:red", alpha=0.6))
    pad = course.landing_pad
    ax.add_patch(_pyplot().Circle(pad.center_xy, pad.radius, color="tab:blue",
                                  alpha=0.3, label="pad"))


def render_replay_report(record: SessionRecord, outdir: str | Path) -> list[Path]:
    """Write trajectory/altitude/channel figures and rows.csv; returns paths."""
    plt = _pyplot()
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []

    course = record.config().course
    t = [row["t_ms"] / 1000.0 for row in record.rows]
    xs = [row["quad"]["position"][0] for row in record.rows]
    ys = [row["quad"]["position"][1] for row in record.rows]
    zs = [row["quad"]["position"][2] for row in record.rows]

    fig, ax = plt.subplots(figsize=(7, 5))
    _draw_course_topdown(ax, course)
    ax.plot(xs, ys, color="tab:orange", linewidth=1.2, label="trajectory")
    ax.plot(xs[:1], ys[:1], "o", color="black", markersize=5)
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.set_aspect("equal")
    ax.set_title(f"{course.name}: top-down trajectory")
    path = outdir / "trajectory_topdown.png"
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    written.append(path)

    fig, ax = plt.subplots(figsize=(8, 3.5))
    ax.plot(t, zs, color="tab:blue")
    for row in record.rows:
        for event in row["events"]:
            ax.axvline(row["t_ms"] / 1000.0, color="tab:red", alpha=0.4, linewidth=0.8)
            ax.annotate(event["type"], (row["t_ms"] / 1000.0, max(zs) * 0.95),
                        rotation=90, fontsize=6, va="top")
    ax.set_xlabel("t [s]")
    ax.set_ylabel("altitude [m]")
    ax.set_title("altitude profile")
    path = outdir / "altitude.png"
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    written.append(path)

    fig, ax = plt.subplots(figsize=(8, 3.5))
    labels = ["roll", "pitch", "throttle", "yaw", "arm"]
    for idx, label in enumerate(labels):
        ax.plot(t, [row["channels"][idx] for row in record.rows], label=label,
                linewidth=0.9)
    ax.set_xlabel("t [s]")
    ax.set_ylabel("ticks")
    ax.set_ylim(100, 1900)
    ax.legend(loc="upper right", fontsize=7)
    ax.set_title("transmitted channels")
    path = outdir / "channels.png"
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    written.append(path)

    path = outdir / "rows.csv"
    _write_rows_csv(record, path)
    written.append(path)
    return written


def render_ueq_report(scales: UeqScales, outdir: str | Path) -> list[Path]:
    """Write the scale chart and scales.csv; returns paths."""
    plt = _pyplot()
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []

    names = ["Pragmatic", "Hedonic", "Overall"]
    stats = [scales.pragmatic, scales.hedonic, scales.overall]
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.bar(names, [s.mean for s in stats], yerr=[s.sd for s in stats],
           color=["tab:blue", "tab:orange", "tab:gray"], capsize=6, alpha=0.85)
    ax.set_ylim(-3, 3)
    ax.axhline(0, color="black", linewidth=0.8)
    ax.set_ylabel("score (-3..3)")
    ax.set_title(f"questionnaire scales (n = {scales.n})")
    path = outdir / "scales.png"
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    written.append(path)

    path = outdir / "scales.csv"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["scale", "mean", "sd", "n"])
        for name, s in zip(names, stats):
            writer.writerow([name.lower(), f"{s.mean:.6f}", f"{s.sd:.6f}", scales.n])
    written.append(path)
    return written
