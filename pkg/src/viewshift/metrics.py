"""View-share transforms: proportion of views, year-over-year relative change,
windowed peak summaries, and 0-100 rescaling.

The proportion of views for an article over a period is its aggregated view
count divided by the project-wide total for the same period. The relative
change compares each week's share with the share 52 weeks earlier on the same
fixed-width weekly grid and is expressed in percent.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date, timedelta
from typing import Iterable, Sequence

from .errors import ConfigurationError, InsufficientHistory, NoData
from .series import DailySeries, Granularity, aggregate
from .wikimedia import ArticleKey

__all__ = [
    "ProportionSeries",
    "RelativeChangeSeries",
    "proportion_of_views",
    "relative_change",
    "max_relative_change",
    "rescale_0_100",
]

_WEEKS_BACK = 52
_YEAR_DAYS = timedelta(days=7 * _WEEKS_BACK)


@dataclass(frozen=True)
class ProportionSeries:
    """Date-indexed view shares in [0, 1]; ``None`` marks a missing period.

    ``zero_total_periods`` records periods where the article had views but the
    project total was zero: the share is left missing and the period is kept
    as a diagnostic instead of emitting an infinity.
    """

    key: ArticleKey | None
    granularity: Granularity
    points: tuple[tuple[date, float | None], ...]
    zero_total_periods: tuple[date, ...] = ()

    def __post_init__(self) -> None:
        pts = tuple((d, None if v is None else float(v)) for d, v in self.points)
        object.__setattr__(self, "points", pts)
        prev = None
        for d, v in pts:
            if prev is not None and d <= prev:
                raise ConfigurationError(f"share dates must be strictly increasing at {d}")
            if v is not None and not (0.0 <= v <= 1.0):
                raise ConfigurationError(f"share at {d} outside [0, 1]: {v}")
            prev = d

    def __len__(self) -> int:
        return len(self.points)

    def present(self) -> list[tuple[date, float]]:
        return [(d, v) for d, v in self.points if v is not None]


@dataclass(frozen=True)
class RelativeChangeSeries:
    """Weekly percent change versus the same week one year (52 weeks) earlier."""

    key: ArticleKey | None
    points: tuple[tuple[date, float | None], ...]

    def __len__(self) -> int:
        return len(self.points)

    def present(self) -> list[tuple[date, float]]:
        return [(d, v) for d, v in self.points if v is not None]


def proportion_of_views(
    article: DailySeries,
    total: DailySeries,
    g: Granularity,
    key: ArticleKey | None = None,
) -> ProportionSeries:
    """Per-period share of an article's views in the project-wide total.

    Both series are sum-aggregated to the requested granularity first. Periods
    where the total is missing yield missing shares; periods where the total
    is zero while the article has data are flagged in ``zero_total_periods``.
    """
    art = aggregate(article, g, policy="sum")
    tot = aggregate(total, g, policy="sum")
    totals = dict(tot.points)

    points: list[tuple[date, float | None]] = []
    zero_totals: list[date] = []
    for d, a in art.points:
        t = totals.get(d)
        if t is None:
            points.append((d, None))
        elif t == 0.0:
            zero_totals.append(d)
            points.append((d, None))
        else:
            points.append((d, a / t))
    return ProportionSeries(key, g, tuple(points), tuple(zero_totals))


def relative_change(p: ProportionSeries) -> RelativeChangeSeries:
    """Percent change of each weekly share against the share 52 weeks earlier.

    ``rc(t) = (share(t) - share(t-52)) / share(t-52) * 100`` on the fixed
    weekly grid; the value is missing when either week is absent or the
    year-earlier share is zero.
    """
    if p.granularity.kind != "weekly":
        raise ConfigurationError("relative change requires a weekly proportion series")
    if not p.points:
        raise InsufficientHistory("empty series")
    first = p.points[0][0]
    last = p.points[-1][0]
    if (last - first) < _YEAR_DAYS:
        raise InsufficientHistory(
            f"series spans {(last - first).days // 7 + 1} weeks; need more than {_WEEKS_BACK}"
        )

    shares = dict(p.points)
    out: list[tuple[date, float | None]] = []
    for d, share in p.points:
        prior_week = d - _YEAR_DAYS
        if prior_week < first:
            continue
        prior = shares.get(prior_week)
        if share is None or prior is None or prior <= 0.0:
            out.append((d, None))
        else:
            out.append((d, (share - prior) / prior * 100.0))
    return RelativeChangeSeries(p.key, tuple(out))


def max_relative_change(
    rc: RelativeChangeSeries, window_start: date, window_len: int
) -> tuple[float, date]:
    """Largest present relative change within ``window_len`` days of ``window_start``.

    Returns ``(peak_rc, peak_week_start)``; ties break to the earliest week.
    """
    window_end = window_start + timedelta(days=window_len)
    peak: float | None = None
    peak_week: date | None = None
    for d, v in rc.points:
        if v is None or not (window_start <= d < window_end):
            continue
        if peak is None or v > peak:
            peak, peak_week = v, d
    if peak is None or peak_week is None:
        raise NoData(f"no relative-change values in [{window_start}, {window_end})")
    return peak, peak_week


def rescale_0_100(x: Iterable[float | None] | Sequence[float | None]) -> list[float | None]:
    """Affine map of the present values onto [0, 100], preserving missing slots.

    Constant sequences map to all zeros, mirroring how negligible search
    interest is reported as zero by 0-100 index providers.
    """
    values = list(x)
    present = [v for v in values if v is not None]
    if not present:
        raise NoData("all values missing")
    lo, hi = min(present), max(present)
    if hi == lo:
        return [None if v is None else 0.0 for v in values]
    span = hi - lo
    return [None if v is None else (v - lo) / span * 100.0 for v in values]
