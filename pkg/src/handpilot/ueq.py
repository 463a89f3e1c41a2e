"""UEQ-S questionnaire scoring.

Eight items per respondent on a -3..+3 scale; items 1-4 form the pragmatic
quality scale, items 5-8 the hedonic quality scale, and all eight the overall
score. Scale statistics are the mean and sample standard deviation (n-1)
across respondents. Means are kept as exact rationals internally so the
identity overall = (pragmatic + hedonic) / 2 holds exactly.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

ITEM_COUNT = 8
ITEM_MIN = -3
ITEM_MAX = 3
RAW_RECODE_OFFSET = 4  # raw 1..7 answers shift down to -3..+3


class InsufficientDataError(ValueError):
    pass


@dataclass(frozen=True)
class UeqResponse:
    participant_id: str
    items: tuple[int, ...]

    def __post_init__(self):
        if len(self.items) != ITEM_COUNT:
            raise ValueError(f"expected {ITEM_COUNT} items, got {len(self.items)}")
        for i, v in enumerate(self.items, 1):
            if not isinstance(v, int) or isinstance(v, bool):
                raise ValueError(f"item {i} must be an integer, got {v!r}")
            if not ITEM_MIN <= v <= ITEM_MAX:
                raise ValueError(f"item {i} value {v} outside {ITEM_MIN}..{ITEM_MAX}")

    def pragmatic(self) -> Fraction:
        return Fraction(sum(self.items[:4]), 4)

    def hedonic(self) -> Fraction:
        return Fraction(sum(self.items[4:]), 4)

    def overall(self) -> Fraction:
        return Fraction(sum(self.items), ITEM_COUNT)


@dataclass(frozen=True)
class ScaleStats:
    mean_exact: Fraction
    variance_exact: Fraction  # sample variance, n-1 denominator

    @property
    def mean(self) -> float:
        return float(self.mean_exact)

    @property
    def sd(self) -> float:
        return math.sqrt(self.variance_exact)


@dataclass(frozen=True)
class UeqScales:
    pragmatic: ScaleStats
    hedonic: ScaleStats
    overall: ScaleStats
    n: int


def _scale_stats(values: list[Fraction]) -> ScaleStats:
    n = len(values)
    mean = sum(values, Fraction(0)) / n
    variance = sum((v - mean) ** 2 for v in values) / (n - 1)
    return ScaleStats(mean_exact=mean, variance_exact=variance)


def score(responses: list[UeqResponse]) -> UeqScales:
    """Scale means and sample SDs across respondents."""
    if len(responses) < 2:
        raise InsufficientDataError("need at least 2 responses for a sample SD")
    return UeqScales(
        pragmatic=_scale_stats([r.pragmatic() for r in responses]),
        hedonic=_scale_stats([r.hedonic() for r in responses]),
        overall=_scale_stats([r.overall() for r in responses]),
        n=len(responses),
    )


def load_responses_csv(path: str | Path, recode: bool = False) -> list[UeqResponse]:
    """Read `participant,i1..i8` rows; --recode shifts raw 1..7 answers."""
    expected = ["participant"] + [f"i{k}" for k in range(1, ITEM_COUNT + 1)]
    responses = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != expected:
            raise ValueError(f"expected header {','.join(expected)!r}")
        for lineno, row in enumerate(reader, 2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != ITEM_COUNT + 1:
                raise ValueError(f"{path}:{lineno}: expected {ITEM_COUNT + 1} columns")
            try:
                items = [int(cell) for cell in row[1:]]
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
            if recode:
                items = [v - RAW_RECODE_OFFSET for v in items]
            responses.append(UeqResponse(participant_id=row[0].strip(), items=tuple(items)))
    return responses


def format_scales_table(scales: UeqScales) -> str:
    """Three-column layout with mean +/- SD at one decimal."""
    def cell(stats: ScaleStats) -> str:
        return f"{stats.mean:.1f} ± {stats.sd:.1f}"

    headers = ("Pragmatic Quality", "Hedonic Quality", "Overall")
    cells = (cell(scales.pragmatic), cell(scales.hedonic), cell(scales.overall))
    widths = [max(len(h), len(c)) for h, c in zip(headers, cells)]
    line1 = " | ".join(h.ljust(w) for h, w in zip(headers, widths))
    line2 = "-+-".join("-" * w for w in widths)
    line3 = " | ".join(c.ljust(w) for c, w in zip(cells, widths))
    return f"{line1}\n{line2}\n{line3}\nn = {scales.n}"
