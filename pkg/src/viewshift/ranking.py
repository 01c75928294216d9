"""Spearman rank correlation and paired stock-versus-share rankings.

Ranks are averaged over ties. Significance uses the two-sided t
approximation ``t = rho * sqrt((n - 2) / (1 - rho^2))`` with ``n - 2``
degrees of freedom; a seeded permutation p-value is available as a
small-sample alternative.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy import stats

from .errors import Degenerate, InsufficientData
from .ground_truth import GroundTruthTable

__all__ = [
    "average_ranks",
    "spearman",
    "spearman_permutation_pvalue",
    "RankComparison",
    "build_rank_comparison",
]


def average_ranks(x: Sequence[float] | np.ndarray) -> np.ndarray:
    """1-based ranks with ties assigned the average of their positions."""
    x = np.asarray(x, dtype=float)
    order = np.argsort(x, kind="mergesort")
    ranks = np.empty(len(x), dtype=float)
    i = 0
    while i < len(x):
        j = i
        while j + 1 < len(x) and x[order[j + 1]] == x[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def _rank_pearson(ra: np.ndarray, rb: np.ndarray) -> float:
    da = ra - ra.mean()
    db = rb - rb.mean()
    denom = np.sqrt((da @ da) * (db @ db))
    return float(np.clip((da @ db) / denom, -1.0, 1.0))


def spearman(a: Sequence[float], b: Sequence[float]) -> tuple[float, float]:
    """Spearman's rho with a two-sided t-approximation p-value."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if len(a) != len(b):
        raise InsufficientData("sequences must have equal length")
    n = len(a)
    if n < 3:
        raise InsufficientData(f"need at least 3 pairs, got {n}")
    if not (np.isfinite(a).all() and np.isfinite(b).all()):
        raise InsufficientData("inputs must be finite")
    ra, rb = average_ranks(a), average_ranks(b)
    if np.ptp(ra) == 0 or np.ptp(rb) == 0:
        raise Degenerate("rank vector has zero variance")
    rho = _rank_pearson(ra, rb)
    if abs(rho) >= 1.0:
        return rho, 0.0
    t = rho * np.sqrt((n - 2) / (1.0 - rho * rho))
    p = 2.0 * float(stats.t.sf(abs(t), n - 2))
    return rho, min(p, 1.0)


def spearman_permutation_pvalue(
    a: Sequence[float], b: Sequence[float], shuffles: int = 10_000, seed: int = 42
) -> float:
    """Two-sided permutation p-value for |rho|; preferred when n < 10."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    observed, _ = spearman(a, b)
    rng = np.random.default_rng(seed)
    ra = average_ranks(a)
    hits = 0
    for _ in range(shuffles):
        perm = rng.permutation(len(b))
        rb = average_ranks(b[perm])
        if np.ptp(rb) == 0:
            continue
        if abs(_rank_pearson(ra, rb)) >= abs(observed) - 1e-12:
            hits += 1
    return (hits + 1) / (shuffles + 1)


@dataclass(frozen=True)
class RankComparison:
    """Locations ranked by refugee stock and by yearly view share, with rho/p."""

    year: int
    language: str
    entries: tuple[tuple[str, int, float], ...]  # (location, stock, share)
    rho: float
    p_value: float


def build_rank_comparison(
    stocks: GroundTruthTable,
    shares: Mapping[str, float],
    year: int,
    language: str,
) -> RankComparison:
    """Pair yearly stocks with yearly shares on common locations and correlate.

    Restricted to the intersection of location names; at least three common
    locations are required for a rank correlation.
    """
    stock_map = stocks.stocks_for_year(year)
    common = sorted(set(stock_map) & set(shares))
    if len(common) < 3:
        raise InsufficientData(
            f"only {len(common)} locations shared between stocks and shares for {year}"
        )
    stock_values = [float(stock_map[c]) for c in common]
    share_values = [float(shares[c]) for c in common]
    rho, p = spearman(stock_values, share_values)
    entries = tuple(
        sorted(
            ((c, stock_map[c], float(shares[c])) for c in common),
            key=lambda e: (-e[1], e[0]),
        )
    )
    return RankComparison(year=year, language=language, entries=entries, rho=rho, p_value=p)
