"""Multiple structural-break estimation for AR(1) regressions.

The series is regressed on an intercept and its own one-day lag; the lag
construction consumes the first observation, so the regression sample has
``n - 1`` rows. Break placements minimizing total segmented RSS are found by
dynamic programming over a precomputed triangular segment-RSS table, the
break count is chosen by BIC, and per-break confidence intervals come from an
RSS-shift profile thresholded at a chi-square(1) quantile times the residual
variance.

Break positions are reported as the index (or calendar date) of the first
observation of the new regime.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date
from typing import Sequence

import numpy as np
from scipy import stats

from .errors import ConfigurationError, InfeasibleConfiguration, InsufficientData
from .metrics import ProportionSeries

__all__ = [
    "BreakModel",
    "SegmentFit",
    "BreakEstimate",
    "BreakReport",
    "PartitionResult",
    "segment_rss",
    "optimal_partition",
    "select_n_breaks",
    "break_confidence_interval",
    "detect_breaks",
]

_DEGENERATE_TOL = 1e-12


@dataclass(frozen=True)
class BreakModel:
    """Settings for break search on an AR(1) regression.

    ``min_segment_frac`` is the trimming fraction: every segment of the
    regression sample must contain at least ``ceil(frac * (n - 1))`` rows.
    """

    series_key: str = ""
    min_segment_frac: float = 0.15
    max_breaks: int = 5
    confidence_level: float = 0.95

    def __post_init__(self) -> None:
        if not (0.0 < self.min_segment_frac <= 0.5):
            raise ConfigurationError("min_segment_frac must be in (0, 0.5]")
        if self.max_breaks < 1:
            raise ConfigurationError("max_breaks must be >= 1")
        if not (0.0 < self.confidence_level < 1.0):
            raise ConfigurationError("confidence_level must be in (0, 1)")

    def min_segment_length(self, n_effective: int) -> int:
        return max(int(math.ceil(self.min_segment_frac * n_effective)), 3)


@dataclass(frozen=True)
class SegmentFit:
    intercept: float
    ar1: float | None  # None when the lag regressor was constant and dropped
    resid_variance: float
    degenerate: bool


@dataclass(frozen=True)
class BreakEstimate:
    date: date
    ci_lower: date | None
    ci_upper: date | None


@dataclass(frozen=True)
class BreakReport:
    series_key: str
    breaks: tuple[BreakEstimate, ...]
    segment_fits: tuple[SegmentFit, ...]
    n_breaks_selected: int
    objective: float


@dataclass(frozen=True)
class PartitionResult:
    n_breaks: int
    breaks: tuple[int, ...]  # original-series index of each new regime's first obs
    total_rss: float
    n_effective: int


# --------------------------------------------------------------------- RSS

def _prefix_sums(y: np.ndarray) -> tuple[np.ndarray, ...]:
    """Prefix sums over the regression sample, centered by the series mean.

    Centering leaves every segment RSS unchanged (the intercept absorbs the
    shift) but avoids catastrophic cancellation when the mean dwarfs the
    variation, as it does for view shares.
    """
    mu = float(y.mean())
    z = y[1:] - mu
    x = y[:-1] - mu
    zero = np.zeros(1)
    return (
        np.concatenate([zero, np.cumsum(x)]),
        np.concatenate([zero, np.cumsum(z)]),
        np.concatenate([zero, np.cumsum(x * x)]),
        np.concatenate([zero, np.cumsum(z * z)]),
        np.concatenate([zero, np.cumsum(x * z)]),
    )


def _rss_from_sums(nseg, sx, sz, sxx, szz, sxz):
    """Segment RSS from sufficient statistics; identical expression for the
    scalar and array paths so table and one-off evaluations agree bitwise."""
    det = nseg * sxx - sx * sx
    with np.errstate(divide="ignore", invalid="ignore"):
        slope = (nseg * sxz - sx * sz) / det
        intercept = (sz - slope * sx) / nseg
        rss_full = szz - intercept * sz - slope * sxz
        rss_const = szz - (sz * sz) / nseg
    degenerate = det <= _DEGENERATE_TOL * nseg * sxx
    rss = np.where(degenerate, rss_const, rss_full)
    return np.maximum(rss, 0.0), degenerate


def segment_rss(y: Sequence[float] | np.ndarray, i: int, j: int) -> float:
    """RSS of the OLS fit of ``y_t`` on ``(1, y_{t-1})`` for ``t`` in ``[i, j)``.

    ``i`` must be >= 1 so the lag exists; at least three rows are required.
    A constant segment falls back to an intercept-only fit.
    """
    y = np.asarray(y, dtype=float)
    if i < 1 or j > len(y):
        raise ConfigurationError(f"segment [{i}, {j}) outside the series")
    if j - i < 3:
        raise InsufficientData("segment needs at least 3 regression rows")
    cx, cz, cxx, czz, cxz = _prefix_sums(y)
    lo, hi = i - 1, j - 1  # regression-sample coordinates
    rss, _ = _rss_from_sums(
        float(hi - lo),
        cx[hi] - cx[lo],
        cz[hi] - cz[lo],
        cxx[hi] - cxx[lo],
        czz[hi] - czz[lo],
        cxz[hi] - cxz[lo],
    )
    return float(rss)


def _rss_table(y: np.ndarray, h: int) -> np.ndarray:
    """Triangular table T[i, j] = RSS of regression rows [i, j); inf if j - i < h."""
    cx, cz, cxx, czz, cxz = _prefix_sums(y)
    n = len(y) - 1
    idx = np.arange(n + 1, dtype=float)
    nseg = idx[None, :] - idx[:, None]
    rss, _ = _rss_from_sums(
        nseg,
        cx[None, :] - cx[:, None],
        cz[None, :] - cz[:, None],
        cxx[None, :] - cxx[:, None],
        czz[None, :] - czz[:, None],
        cxz[None, :] - cxz[:, None],
    )
    rss[nseg < h] = np.inf
    return rss


# ---------------------------------------------------------------------- DP

def optimal_partition(y: Sequence[float] | np.ndarray, model: BreakModel) -> list[PartitionResult]:
    """Best break placements for every break count 0..max_breaks.

    For each m the dynamic program minimizes the total segment RSS over all
    placements whose segments respect the trimming length.
    """
    y = np.asarray(y, dtype=float)
    n_eff = len(y) - 1
    if n_eff < 3:
        raise InsufficientData(f"need at least 4 observations, got {len(y)}")
    h = model.min_segment_length(n_eff)
    if (model.max_breaks + 1) * h > n_eff:
        raise InfeasibleConfiguration(
            f"{model.max_breaks} breaks with minimum segment {h} need "
            f"{(model.max_breaks + 1) * h} rows, have {n_eff}"
        )

    table = _rss_table(y, h)
    return _partition_from_table(table, h, model.max_breaks, n_eff)


def _partition_from_table(
    table: np.ndarray, h: int, max_breaks: int, n_eff: int
) -> list[PartitionResult]:
    best = np.full((max_breaks + 1, n_eff + 1), np.inf)
    parent = np.full((max_breaks + 1, n_eff + 1), -1, dtype=np.int64)
    best[0] = table[0]
    for k in range(1, max_breaks + 1):
        candidates = best[k - 1][:, None] + table
        best[k] = candidates.min(axis=0)
        parent[k] = candidates.argmin(axis=0)

    results = []
    for m in range(max_breaks + 1):
        total = float(best[m, n_eff])
        cuts: list[int] = []
        pos = n_eff
        for k in range(m, 0, -1):
            pos = int(parent[k, pos])
            cuts.append(pos)
        cuts.reverse()
        # regression-row cut -> original index of the new regime's first obs
        results.append(
            PartitionResult(m, tuple(c + 1 for c in cuts), total, n_eff)
        )
    return results


def select_n_breaks(partitions: Sequence[PartitionResult]) -> int:
    """Break count minimizing BIC; an exact fit wins immediately (smallest m)."""
    if not partitions:
        raise InsufficientData("no partitions given")
    n = partitions[0].n_effective
    best_m, best_bic = 0, np.inf
    for part in sorted(partitions, key=lambda p: p.n_breaks):
        m = part.n_breaks
        k = (m + 1) * 2 + m  # per-segment intercept+slope, plus break dates
        if part.total_rss <= 0.0:
            bic = -np.inf
        else:
            bic = n * math.log(part.total_rss / n) + k * math.log(n)
        if bic < best_bic:
            best_m, best_bic = m, bic
    return best_m


# ----------------------------------------------------------------------- CI

def break_confidence_interval(
    y: Sequence[float] | np.ndarray,
    breaks: Sequence[int],
    index: int,
    model: BreakModel,
    level: float = 0.95,
) -> tuple[int, int] | None:
    """Shift-profile confidence interval for one estimated break.

    Holding the other breaks fixed, the chosen break is slid across all
    admissible positions; the CI is the contiguous run of positions whose RSS
    excess over the profile minimum stays below the chi-square(1) quantile
    times the residual variance. ``None`` (NA) is returned when that run hits
    an admissible boundary, i.e. the profile is too flat or monotone for the
    interval to be meaningful.
    """
    y = np.asarray(y, dtype=float)
    n_eff = len(y) - 1
    h = model.min_segment_length(n_eff)
    table = _rss_table(y, h)
    return _profile_ci(table, y, list(breaks), index, h, n_eff, level)


def _profile_ci(
    table: np.ndarray,
    y: np.ndarray,
    breaks: list[int],
    index: int,
    h: int,
    n_eff: int,
    level: float,
) -> tuple[int, int] | None:
    if not 0 <= index < len(breaks):
        raise ConfigurationError(f"break index {index} out of range")
    cuts = [b - 1 for b in breaks]  # regression-row coordinates
    fitted = cuts[index]
    prev = cuts[index - 1] if index > 0 else 0
    nxt = cuts[index + 1] if index + 1 < len(cuts) else n_eff

    lo_adm, hi_adm = prev + h, nxt - h
    if not (lo_adm <= fitted <= hi_adm):
        return None

    taus = np.arange(lo_adm, hi_adm + 1)
    profile = table[prev, taus] + table[taus, nxt]

    bounds = [0] + cuts + [n_eff]
    total_rss = float(sum(table[bounds[i], bounds[i + 1]] for i in range(len(bounds) - 1)))
    dof = n_eff - 2 * (len(cuts) + 1)
    if dof <= 0:
        return None
    sigma2 = total_rss / dof
    threshold = float(stats.chi2.ppf(level, 1)) * sigma2

    pmin = float(profile.min())
    center = fitted - lo_adm
    lo = center
    while lo - 1 >= 0 and profile[lo - 1] - pmin <= threshold:
        lo -= 1
    hi = center
    while hi + 1 <= len(taus) - 1 and profile[hi + 1] - pmin <= threshold:
        hi += 1
    if lo == 0 or hi == len(taus) - 1:
        return None  # profile under threshold all the way to a boundary
    return int(taus[lo]) + 1, int(taus[hi]) + 1


# ----------------------------------------------------------------- detection

def _segment_coefficients(y: np.ndarray, breaks: Sequence[int]) -> tuple[SegmentFit, ...]:
    cuts = [0] + [b - 1 for b in breaks] + [len(y) - 1]
    z_all, x_all = y[1:], y[:-1]
    fits = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        z, x = z_all[lo:hi], x_all[lo:hi]
        nseg = len(z)
        degenerate = bool(np.ptp(x) <= _DEGENERATE_TOL * max(abs(x).max(), 1.0))
        if degenerate:
            intercept, ar1 = float(z.mean()), None
            resid = z - intercept
            params = 1
        else:
            design = np.column_stack([np.ones(nseg), x])
            beta, *_ = np.linalg.lstsq(design, z, rcond=None)
            intercept, ar1 = float(beta[0]), float(beta[1])
            resid = z - design @ beta
            params = 2
        dof = max(nseg - params, 1)
        fits.append(SegmentFit(intercept, ar1, float(resid @ resid / dof), degenerate))
    return tuple(fits)


def detect_breaks(series: ProportionSeries, model: BreakModel) -> BreakReport:
    """Full break analysis of a daily share series.

    Missing days are dropped and the present values are treated as a
    contiguous regression sample; break dates are reported on the original
    calendar.
    """
    present = series.present()
    if len(present) < 4:
        raise InsufficientData("need at least 4 present observations")
    dates = [d for d, _ in present]
    y = np.asarray([v for _, v in present], dtype=float)
    n_eff = len(y) - 1
    h = model.min_segment_length(n_eff)
    if (model.max_breaks + 1) * h > n_eff:
        raise InfeasibleConfiguration(
            f"{model.max_breaks} breaks with minimum segment {h} need "
            f"{(model.max_breaks + 1) * h} rows, have {n_eff}"
        )

    table = _rss_table(y, h)
    partitions = _partition_from_table(table, h, model.max_breaks, n_eff)
    n_sel = select_n_breaks(partitions)
    chosen = partitions[n_sel]

    estimates = []
    for i, b in enumerate(chosen.breaks):
        ci = _profile_ci(table, y, list(chosen.breaks), i, h, n_eff, model.confidence_level)
        if ci is None:
            estimates.append(BreakEstimate(dates[b], None, None))
        else:
            estimates.append(BreakEstimate(dates[b], dates[ci[0]], dates[ci[1]]))

    return BreakReport(
        series_key=model.series_key or (series.key.label if series.key else ""),
        breaks=tuple(estimates),
        segment_fits=_segment_coefficients(y, chosen.breaks),
        n_breaks_selected=n_sel,
        objective=chosen.total_rss,
    )
