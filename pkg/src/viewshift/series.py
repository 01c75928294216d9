"""Date-indexed series, calendar aggregation, alignment, and lag construction.

The daily series type is the common currency of the toolkit: article pageview
streams, project totals, and border-crossing counts all arrive as ordered
(date, count) points. Gaps are legal and are distinct from zeros.
"""

from __future__ import annotations

import calendar
import math
from dataclasses import dataclass, field
from datetime import date, timedelta
from typing import Iterable, Sequence

import numpy as np

from .errors import AlignmentEmpty, ConfigurationError, InsufficientData

__all__ = [
    "DailySeries",
    "Granularity",
    "AlignedPair",
    "aggregate",
    "align",
    "lag_shift",
]


@dataclass(frozen=True)
class DailySeries:
    """Ordered (date, value) points for one article, project total, or count stream.

    Dates are strictly increasing calendar days; values are finite and >= 0.
    Missing days are simply absent, never stored as zeros.
    ``partial_periods`` is populated by :func:`aggregate` to flag buckets that
    did not contain every calendar day of the period.
    """

    label: str
    points: tuple[tuple[date, float], ...]
    partial_periods: frozenset[date] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        pts = tuple((d, float(v)) for d, v in self.points)
        object.__setattr__(self, "points", pts)
        prev = None
        for d, v in pts:
            if not isinstance(d, date):
                raise ConfigurationError(f"{self.label}: point dates must be calendar days, got {d!r}")
            if prev is not None and d <= prev:
                raise ConfigurationError(f"{self.label}: dates must be strictly increasing at {d}")
            if not math.isfinite(v) or v < 0:
                raise ConfigurationError(f"{self.label}: value at {d} must be finite and >= 0, got {v}")
            prev = d

    @classmethod
    def from_arrays(cls, label: str, dates: Sequence[date], values: Iterable[float]) -> "DailySeries":
        return cls(label, tuple(zip(dates, values)))

    def __len__(self) -> int:
        return len(self.points)

    def dates(self) -> tuple[date, ...]:
        return tuple(d for d, _ in self.points)

    def values(self) -> np.ndarray:
        return np.array([v for _, v in self.points], dtype=float)

    @property
    def first_date(self) -> date | None:
        return self.points[0][0] if self.points else None

    @property
    def last_date(self) -> date | None:
        return self.points[-1][0] if self.points else None


_GRANULARITIES = ("daily", "weekly", "monthly", "yearly")


@dataclass(frozen=True)
class Granularity:
    """Calendar bucketing rule.

    Weekly buckets are consecutive 7-day blocks counted from ``anchor``; they
    are fixed width by construction, unlike ISO weeks, so index arithmetic
    such as "52 periods earlier" is exact.
    """

    kind: str
    anchor: date | None = None

    def __post_init__(self) -> None:
        if self.kind not in _GRANULARITIES:
            raise ConfigurationError(f"unknown granularity {self.kind!r}")
        if self.anchor is not None and self.kind != "weekly":
            raise ConfigurationError("only weekly granularity takes an anchor")

    @classmethod
    def daily(cls) -> "Granularity":
        return cls("daily")

    @classmethod
    def weekly(cls, anchor: date | None = None) -> "Granularity":
        return cls("weekly", anchor)

    @classmethod
    def monthly(cls) -> "Granularity":
        return cls("monthly")

    @classmethod
    def yearly(cls) -> "Granularity":
        return cls("yearly")

    def bucket_start(self, d: date, anchor: date) -> date:
        if self.kind == "daily":
            return d
        if self.kind == "weekly":
            offset = (d - anchor).days
            return anchor + timedelta(days=7 * (offset // 7))
        if self.kind == "monthly":
            return d.replace(day=1)
        return d.replace(month=1, day=1)

    def bucket_days(self, start: date) -> int:
        """Number of calendar days the bucket starting at ``start`` spans."""
        if self.kind == "daily":
            return 1
        if self.kind == "weekly":
            return 7
        if self.kind == "monthly":
            return calendar.monthrange(start.year, start.month)[1]
        return 366 if calendar.isleap(start.year) else 365


@dataclass(frozen=True)
class AlignedPair:
    """Two value sequences restricted to their shared dates."""

    a: np.ndarray
    b: np.ndarray
    dates: tuple[date, ...]
    label_a: str = "a"
    label_b: str = "b"

    def __post_init__(self) -> None:
        object.__setattr__(self, "a", np.asarray(self.a, dtype=float))
        object.__setattr__(self, "b", np.asarray(self.b, dtype=float))
        if not (len(self.a) == len(self.b) == len(self.dates)):
            raise ConfigurationError("aligned sequences must have equal length")

    def __len__(self) -> int:
        return len(self.dates)


def aggregate(series: DailySeries, g: Granularity, policy: str = "sum") -> DailySeries:
    """Aggregate a daily series into calendar buckets.

    Each output point is labeled with the first calendar day of its bucket.
    Missing days contribute nothing (``sum``) or are excluded from the average
    (``mean``); buckets with no present days are omitted. Buckets covering
    fewer days than the full period are flagged in ``partial_periods``.
    """
    if policy not in ("sum", "mean"):
        raise ConfigurationError(f"unknown aggregation policy {policy!r}")
    if not series.points:
        return DailySeries(series.label, ())

    first = series.points[0][0]
    anchor = first
    if g.kind == "weekly":
        anchor = g.anchor if g.anchor is not None else first
        if anchor > first:
            raise ConfigurationError(
                f"weekly anchor {anchor} is after the first series date {first}"
            )

    out: list[tuple[date, float]] = []
    partial: set[date] = set()
    bucket_start: date | None = None
    acc = 0.0
    count = 0

    def flush() -> None:
        if bucket_start is None:
            return
        value = acc if policy == "sum" else acc / count
        out.append((bucket_start, value))
        if count < g.bucket_days(bucket_start):
            partial.add(bucket_start)

    for d, v in series.points:
        start = g.bucket_start(d, anchor)
        if start != bucket_start:
            flush()
            bucket_start = start
            acc = 0.0
            count = 0
        acc += v
        count += 1
    flush()

    return DailySeries(series.label, tuple(out), frozenset(partial))


def align(a: DailySeries, b: DailySeries) -> AlignedPair:
    """Restrict two series to the intersection of their dates, order preserved."""
    b_map = dict(b.points)
    shared = [(d, v, b_map[d]) for d, v in a.points if d in b_map]
    if not shared:
        raise AlignmentEmpty(f"{a.label} and {b.label} share no dates")
    dates = tuple(d for d, _, _ in shared)
    va = np.array([v for _, v, _ in shared], dtype=float)
    vb = np.array([v for _, _, v in shared], dtype=float)
    return AlignedPair(va, vb, dates, label_a=a.label, label_b=b.label)


def lag_shift(series: Sequence[float] | np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Split a sequence into (lagged, contemporaneous) views offset by ``k``.

    ``lagged[i] = series[i]`` and ``contemporaneous[i] = series[i + k]``;
    both outputs have length ``n - k``.
    """
    x = np.asarray(series, dtype=float)
    n = len(x)
    if k < 0:
        raise ConfigurationError("lag k must be >= 0")
    if k >= n:
        raise InsufficientData(f"lag k={k} requires more than {n} observations")
    if k == 0:
        return x.copy(), x.copy()
    return x[:-k].copy(), x[k:].copy()
