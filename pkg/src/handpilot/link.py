"""Radio link simulation: fixed packet cadence, latency, i.i.d. loss,
link-quality telemetry, and the failsafe timeout test.

Deterministic given the configured seed; packets never reorder (single FIFO
path with fixed latency).
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass

PACKET_RATES = (50, 150, 250, 500)  # Hz, common link configurations
LQ_WINDOW = 100


@dataclass(frozen=True)
class LinkConfig:
    packet_rate: int = 250  # Hz
    latency_ms: float = 10.0
    loss_probability: float = 0.0
    rng_seed: int = 0
    failsafe_timeout_ms: float = 300.0

    def __post_init__(self):
        if self.packet_rate not in PACKET_RATES:
            raise ValueError(f"packet_rate must be one of {PACKET_RATES}")
        if self.latency_ms < 0:
            raise ValueError("latency_ms must be >= 0")
        if not 0.0 <= self.loss_probability < 1.0:
            raise ValueError("loss_probability outside [0, 1)")

    @classmethod
    def from_mapping(cls, d: dict) -> "LinkConfig":
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in d.items() if k in known})


class LinkStatsWindow:
    """Sliding window over the last 100 packet outcomes plus lifetime totals."""

    def __init__(self, window_size: int = LQ_WINDOW):
        self.window_size = window_size
        self._window: deque[bool] = deque(maxlen=window_size)
        self.sent_total = 0
        self.delivered_total = 0

    def record(self, delivered: bool) -> None:
        self._window.append(delivered)
        self.sent_total += 1
        if delivered:
            self.delivered_total += 1

    @property
    def lq(self) -> int:
        """Windowed link quality, percent, integer-truncated."""
        if not self._window:
            return 100
        return sum(self._window) * 100 // len(self._window)

    @property
    def lq_cumulative(self) -> float:
        if self.sent_total == 0:
            return 100.0
        return self.delivered_total / self.sent_total * 100.0

    @property
    def simulated_rssi(self) -> int:
        """dBm estimate derived from windowed LQ: -50 at LQ 100 down to -100."""
        return -(50 + (100 - self.lq) // 2)


@dataclass(frozen=True)
class Delivery:
    frame: bytes
    arrival_ms: float


def schedule_packets(t0: float, t1: float, rate: int) -> list[float]:
    """Send timestamps at exact 1000/rate ms intervals within [t0, t1)."""
    if t1 < t0:
        raise ValueError("t1 must be >= t0")
    out = []
    i = 0
    while True:
        t = t0 + (i * 1000.0) / rate
        if t >= t1:
            break
        out.append(t)
        i += 1
    return out


class RadioLink:
    """One uplink path. transmit() returns a Delivery or None when lost."""

    def __init__(self, cfg: LinkConfig):
        self.cfg = cfg
        self.stats = LinkStatsWindow()
        self._rng = random.Random(cfg.rng_seed)

    def transmit(self, frame: bytes, now_ms: float) -> Delivery | None:
        lost = self._rng.random() < self.cfg.loss_probability
        self.stats.record(not lost)
        if lost:
            return None
        return Delivery(frame=frame, arrival_ms=now_ms + self.cfg.latency_ms)


def check_failsafe(last_arrival_ms: float, now_ms: float, cfg: LinkConfig) -> bool:
    """True once the gap since the last delivery exceeds the timeout (strict)."""
    return now_ms - last_arrival_ms > cfg.failsafe_timeout_ms
