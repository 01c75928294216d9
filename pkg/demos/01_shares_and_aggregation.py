"""Daily series, calendar aggregation, and view shares.

A pageview stream is an ordered list of (day, count) points with gaps where
the API returned nothing. This walk-through builds one, rolls it up to weekly
buckets, and normalizes it by the project-wide total to get a share series
that is comparable across languages of very different sizes.
"""

from datetime import date, timedelta

import numpy as np

from viewshift import DailySeries, Granularity, aggregate, align, proportion_of_views

start = date(2022, 2, 1)
rng = np.random.default_rng(1)

# An article getting ~2000 views a day, with two missing days (gaps, not zeros).
days = [start + timedelta(days=i) for i in range(28)]
views = rng.integers(1500, 2500, size=28)
article = DailySeries(
    "uk.wikipedia.org/Катовіце",
    tuple((d, float(v)) for i, (d, v) in enumerate(zip(days, views)) if i not in (9, 10)),
)
print(f"article: {len(article)} days, first={article.first_date}, last={article.last_date}")

# Weekly rollup. Buckets are fixed 7-day blocks counted from the anchor, so
# week arithmetic like "52 weeks earlier" stays exact.
weekly = aggregate(article, Granularity.weekly(anchor=start), policy="sum")
for d, v in weekly.points:
    marker = "  (partial week)" if d in weekly.partial_periods else ""
    print(f"  week of {d}: {v:8.0f} views{marker}")

# Sum-aggregation conserves total mass regardless of granularity.
assert sum(v for _, v in weekly.points) == sum(v for _, v in article.points)

# Normalizing by the project total gives the share of all traffic this
# article received, which is what makes 2019 and 2022 numbers comparable.
totals = DailySeries(
    "project-total:uk.wikipedia.org",
    tuple((d, float(v)) for d, v in zip(days, rng.integers(40_000_000, 60_000_000, size=28))),
)
shares = proportion_of_views(article, totals, Granularity.weekly(anchor=start))
print("\nweekly view shares:")
for d, share in shares.points:
    print(f"  week of {d}: {share:.3e}" if share is not None else f"  week of {d}: missing")

# align() is the glue for comparing two daily streams over their common days.
pair = align(article, totals)
print(f"\naligned {len(pair)} shared days; correlation-ready arrays of shape {pair.a.shape}")
