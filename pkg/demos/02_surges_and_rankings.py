"""Year-over-year surge metrics and rank correlation against ground truth.

Two questions this supports: "how violently did attention to a place spike
compared to the same week last year?" (relative change, peak summaries) and
"do places with more registered refugees also draw more reading?"
(Spearman correlation of stocks vs yearly shares).
"""

from datetime import date, timedelta

import numpy as np

from viewshift import (
    Granularity,
    ProportionSeries,
    build_rank_comparison,
    max_relative_change,
    relative_change,
    rescale_0_100,
    spearman_permutation_pvalue,
)
from viewshift.ground_truth import KIND_STOCKS, GroundTruthRow, GroundTruthTable

anchor = date(2020, 8, 24)
WEEK = timedelta(days=7)
rng = np.random.default_rng(5)

# --- relative change ------------------------------------------------------
# 120 weeks of shares: a stable baseline with a sudden 6x jump at week 80,
# echoing what an invasion-driven surge looks like in share space.
baseline = 2e-5 * (1 + 0.1 * np.sin(np.arange(120) * 2 * np.pi / 52))
shares = baseline.copy()
shares[80:84] *= 6.0
weekly = ProportionSeries(
    None, Granularity.weekly(anchor), tuple((anchor + i * WEEK, float(s)) for i, s in enumerate(shares))
)

rc = relative_change(weekly)
peak, peak_week = max_relative_change(rc, anchor + 78 * WEEK, 42)
print(f"peak relative change: {peak:.0f}% in the week of {peak_week}")
assert peak > 400

# The same numbers mapped onto a 0-100 index, the scale search-interest
# tools report on, for side-by-side plotting.
index = rescale_0_100([v for _, v in rc.points])
print(f"0-100 index: min={min(v for v in index if v is not None):.0f}, "
      f"max={max(v for v in index if v is not None):.0f}")

# --- rank correlation -----------------------------------------------------
# Synthetic yearly stocks for nine cities and yearly shares that track them
# noisily: Spearman's rho measures how well the orderings agree.
cities = [f"city-{chr(97 + i)}" for i in range(9)]
stocks = {c: int(v) for c, v in zip(cities, rng.integers(2_000, 90_000, size=9))}
yearly_shares = {c: stocks[c] * 1e-9 * rng.uniform(0.7, 1.3) for c in cities}

table = GroundTruthTable(
    KIND_STOCKS, tuple(GroundTruthRow(c, 2022, s) for c, s in stocks.items())
)
comparison = build_rank_comparison(table, yearly_shares, year=2022, language="uk")
print(f"\nrho = {comparison.rho:.3f}, t-approximation p = {comparison.p_value:.4f}")

# With fewer than ten locations the t-approximation is rough; a seeded
# permutation p-value is the safer report.
p_perm = spearman_permutation_pvalue(
    [float(stocks[c]) for c in cities], [yearly_shares[c] for c in cities], seed=42
)
print(f"permutation p = {p_perm:.4f}")

print("\nranking (largest stock first):")
for location, stock, share in comparison.entries:
    print(f"  {location:<8} stock={stock:>7,}  share={share:.2e}")
