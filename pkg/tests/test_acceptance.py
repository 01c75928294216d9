"""Acceptance suite: one test per criterion, each printing its PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines. Criterion 10 needs live Wikimedia data (and locally supplied
ground-truth files); it is skipped unless VIEWSHIFT_NETWORK_TESTS=1.
"""

import os
import time
from datetime import date, timedelta

import numpy as np
import pytest

from viewshift.breaks import BreakModel, break_confidence_interval, optimal_partition, segment_rss, select_n_breaks
from viewshift.cli import main
from viewshift.econometrics import adf_test, fit_var, granger_test, select_lag
from viewshift.metrics import (
    ProportionSeries,
    proportion_of_views,
    relative_change,
    rescale_0_100,
)
from viewshift.ranking import spearman
from viewshift.series import AlignedPair, DailySeries, Granularity

D0 = date(2021, 1, 4)
WEEK = timedelta(days=7)


def report(name: str, ok: bool, detail: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


def rank_by_definition(x):
    return [
        1.0 + sum(1 for v in x if v < xi) + (sum(1 for v in x if v == xi) - 1) / 2.0
        for xi in x
    ]


def rho_by_definition(a, b):
    ra, rb = rank_by_definition(a), rank_by_definition(b)
    n = len(ra)
    ma, mb = sum(ra) / n, sum(rb) / n
    cov = sum((x - ma) * (y - mb) for x, y in zip(ra, rb))
    va = sum((x - ma) ** 2 for x in ra)
    vb = sum((y - mb) ** 2 for y in rb)
    return cov / (va * vb) ** 0.5


def test_criterion_1_spearman_oracle_equivalence():
    start = time.monotonic()
    rng = np.random.default_rng(100)
    checked = 0
    worst = 0.0
    while checked < 200:
        n = int(rng.integers(3, 9))
        a = rng.integers(0, 5, size=n).astype(float)
        b = rng.integers(0, 5, size=n).astype(float)
        if np.ptp(rank_by_definition(a)) == 0 or np.ptp(rank_by_definition(b)) == 0:
            continue
        rho, _ = spearman(a, b)
        worst = max(worst, abs(rho - rho_by_definition(a, b)))
        checked += 1
    elapsed = time.monotonic() - start
    report(
        "criterion 1 (spearman oracle)",
        worst <= 1e-12 and elapsed < 1.0,
        f"200 vectors, max |rho - oracle| = {worst:.2e}, {elapsed:.2f}s",
    )


def test_criterion_2_break_dp_exactness():
    start = time.monotonic()
    rng = np.random.default_rng(200)
    model = BreakModel(max_breaks=2)
    mismatches = 0
    for _ in range(50):
        n = int(rng.integers(30, 61))
        y = rng.standard_normal(n)
        parts = optimal_partition(y, model)
        n_eff = n - 1
        h = model.min_segment_length(n_eff)

        best1 = min(
            segment_rss(y, 1, c + 1) + segment_rss(y, c + 1, n)
            for c in range(h, n_eff - h + 1)
        )
        best2 = min(
            (segment_rss(y, 1, c1 + 1) + segment_rss(y, c1 + 1, c2 + 1))
            + segment_rss(y, c2 + 1, n)
            for c1 in range(h, n_eff + 1)
            for c2 in range(c1 + h, n_eff - h + 1)
        )
        if parts[1].total_rss != best1 or parts[2].total_rss != best2:
            mismatches += 1
    elapsed = time.monotonic() - start
    report(
        "criterion 2 (break DP exactness)",
        mismatches == 0 and elapsed < 10.0,
        f"50 series, {mismatches} mismatches vs exhaustive enumeration, {elapsed:.2f}s",
    )


@pytest.fixture(scope="module")
def break_recovery_suite():
    model = BreakModel()
    start = time.monotonic()
    results = []
    for seed in range(100):
        rng = np.random.default_rng(seed)
        e = rng.standard_normal(600)
        y = np.empty(600)
        y[0] = 0.0
        for t in range(1, 600):
            y[t] = (5.0 if t >= 300 else 0.0) + 0.5 * y[t - 1] + e[t]
        parts = optimal_partition(y, model)
        m = select_n_breaks(parts)
        entry = {"m": m, "hit": False, "covered": False}
        if m >= 1:
            breaks = parts[m].breaks
            nearest = min(breaks, key=lambda b: abs(b - 300))
            entry["hit"] = abs(nearest - 300) <= 5
            ci = break_confidence_interval(y, breaks, breaks.index(nearest), model)
            entry["covered"] = ci is not None and ci[0] <= 300 <= ci[1]
        results.append(entry)
    return results, time.monotonic() - start


def test_criterion_3_break_recovery(break_recovery_suite):
    results, elapsed = break_recovery_suite
    hits = sum(r["m"] >= 1 and r["hit"] for r in results)
    report(
        "criterion 3 (break recovery)",
        hits >= 95 and elapsed < 60.0,
        f"break found within +/-5 of t=300 in {hits}/100 runs, {elapsed:.1f}s",
    )


def test_criterion_4_break_ci_coverage(break_recovery_suite):
    results, _ = break_recovery_suite
    found = [r for r in results if r["m"] >= 1]
    covered = sum(r["covered"] for r in found)
    rate = covered / len(found) if found else 0.0
    report(
        "criterion 4 (break CI coverage)",
        rate >= 0.85,
        f"CI covered the true break in {covered}/{len(found)} runs with a break "
        f"({rate:.0%}; approximate-coverage check)",
    )


def test_criterion_5_adf_calibration():
    start = time.monotonic()
    size_rejections = power_rejections = 0
    for seed in range(1000):
        rng = np.random.default_rng(seed)
        walk = np.cumsum(rng.standard_normal(500))
        noise = rng.standard_normal(500)
        if adf_test(walk, 3).reject_at_5pct:
            size_rejections += 1
        if adf_test(noise, 3).reject_at_5pct:
            power_rejections += 1
    elapsed = time.monotonic() - start
    size = size_rejections / 1000
    power = power_rejections / 1000
    report(
        "criterion 5 (ADF calibration)",
        0.02 <= size <= 0.08 and power >= 0.99 and elapsed < 60.0,
        f"random-walk size {size:.1%} (want 2-8%), white-noise power {power:.1%}, {elapsed:.1f}s",
    )


A1 = np.array([[0.6, 0.1], [0.0, 0.5]])
A2 = np.array([[0.3, 0.0], [0.1, 0.25]])
VAR2_TRUTH = np.array([[0.0, 0.6, 0.1, 0.3, 0.0], [0.0, 0.0, 0.5, 0.1, 0.25]])


def simulate_var2(seed: int, n: int = 2000):
    rng = np.random.default_rng(seed)
    y = np.zeros((n + 50, 2))
    e = rng.standard_normal((n + 50, 2))
    for t in range(2, n + 50):
        y[t] = A1 @ y[t - 1] + A2 @ y[t - 2] + e[t]
    data = y[50:]
    dates = tuple(D0 + timedelta(days=i) for i in range(n))
    return AlignedPair(data[:, 0], data[:, 1], dates)


def test_criterion_6_var_recovery():
    start = time.monotonic()
    fit = fit_var(simulate_var2(0), 2)
    max_err = float(np.abs(fit.coefficients - VAR2_TRUTH).max())
    picks = sum(select_lag(simulate_var2(seed), 4) == 2 for seed in range(100))
    elapsed = time.monotonic() - start
    report(
        "criterion 6 (VAR recovery)",
        max_err <= 0.05 and picks >= 80,
        f"max coefficient error {max_err:.4f} (want <=0.05), AIC picked lag 2 in "
        f"{picks}/100 runs, {elapsed:.1f}s",
    )


def test_criterion_7_granger_directionality():
    start = time.monotonic()
    forward = reverse = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        n = 1000
        x = rng.standard_normal(n + 3)
        y = 0.8 * x[:-3] + rng.standard_normal(n)
        dates = tuple(D0 + timedelta(days=i) for i in range(n))
        pair = AlignedPair(x[3:], y, dates)
        lag = select_lag(pair, 6)
        if granger_test(pair, "a->b", lag).p_value < 0.01:
            forward += 1
        if granger_test(pair, "b->a", lag).p_value > 0.05:
            reverse += 1

    rejections = 0
    for seed in range(1000):
        rng = np.random.default_rng(10_000 + seed)
        dates = tuple(D0 + timedelta(days=i) for i in range(500))
        pair = AlignedPair(rng.standard_normal(500), rng.standard_normal(500), dates)
        if granger_test(pair, "a->b", 3).p_value < 0.05:
            rejections += 1
    size = rejections / 1000
    elapsed = time.monotonic() - start
    report(
        "criterion 7 (Granger directionality)",
        forward >= 95 and reverse >= 90 and 0.02 <= size <= 0.08,
        f"cause->effect significant {forward}/100, reverse non-significant "
        f"{reverse}/100, white-noise size {size:.1%}, {elapsed:.1f}s",
    )


def test_criterion_8_metric_identities():
    start = time.monotonic()
    rng = np.random.default_rng(800)
    failures = []
    for fixture in range(1000):
        # view shares stay in [0, 1] whenever article <= total
        n = 40
        tot_vals = rng.integers(1, 1_000_000, size=n).astype(float)
        art_vals = np.floor(tot_vals * rng.random(n))
        tot = DailySeries.from_arrays("t", [D0 + timedelta(days=i) for i in range(n)], tot_vals)
        art = DailySeries.from_arrays("a", [D0 + timedelta(days=i) for i in range(n)], art_vals)
        shares = proportion_of_views(art, tot, Granularity.daily())
        if not all(v is not None and 0.0 <= v <= 1.0 for _, v in shares.points):
            failures.append((fixture, "share bounds"))

        # relative change round-trips and is scale invariant
        weeks = int(rng.integers(106, 130))
        values = rng.uniform(1e-7, 1e-3, size=weeks)
        grid = tuple((D0 + i * WEEK, float(v)) for i, v in enumerate(values))
        p = ProportionSeries(None, Granularity.weekly(D0), grid)
        rc = relative_change(p)
        lookup = dict(grid)
        for d, v in rc.present():
            prior = lookup[d - 52 * WEEK]
            if abs(lookup[d] - prior * (1 + v / 100.0)) > 1e-12 * abs(lookup[d]):
                failures.append((fixture, "round trip"))
                break
        c = float(rng.uniform(0.01, 1.0))  # positive scale keeping shares in [0, 1]
        rc_scaled = relative_change(
            ProportionSeries(None, Granularity.weekly(D0), tuple((d, v * c) for d, v in grid))
        )
        for (d1, v1), (d2, v2) in zip(rc.points, rc_scaled.points):
            if (v1 is None) != (v2 is None) or (v1 is not None and abs(v1 - v2) > 1e-9 * max(abs(v1), 1.0)):
                failures.append((fixture, "scale invariance"))
                break

        # rescale endpoints
        x = rng.uniform(-50, 50, size=int(rng.integers(2, 40)))
        if np.ptp(x) > 0:
            out = rescale_0_100(list(x))
            if abs(min(out)) > 1e-9 or abs(max(out) - 100.0) > 1e-9:
                failures.append((fixture, "rescale endpoints"))
    elapsed = time.monotonic() - start
    report(
        "criterion 8 (metric identities)",
        not failures,
        f"1000 fixtures, {len(failures)} failures{failures[:3] if failures else ''}, {elapsed:.1f}s",
    )


def test_criterion_9_cli_determinism(world):
    start = time.monotonic()
    code1 = main(["report", "--config", str(world["config_path"])])
    snapshot1 = {
        str(p.relative_to(world["out_dir"])): p.read_bytes()
        for p in sorted(world["out_dir"].rglob("*"))
        if p.is_file()
    }
    code2 = main(["report", "--config", str(world["config_path"])])
    snapshot2 = {
        str(p.relative_to(world["out_dir"])): p.read_bytes()
        for p in sorted(world["out_dir"].rglob("*"))
        if p.is_file()
    }
    identical = snapshot1.keys() == snapshot2.keys() and all(
        snapshot1[k] == snapshot2[k] for k in snapshot1
    )
    elapsed = time.monotonic() - start
    report(
        "criterion 9 (CLI determinism)",
        code1 == 0 and code2 == 0 and identical,
        f"two report runs over {len(snapshot1)} output files byte-identical, {elapsed:.1f}s",
    )


# --------------------------------------------------------------- criterion 10

NETWORK = os.environ.get("VIEWSHIFT_NETWORK_TESTS") == "1"
GROUND_TRUTH_DIR = os.environ.get("VIEWSHIFT_GROUND_TRUTH_DIR")

POLISH_CITIES_UK = {
    "Białystok": "Білосток",
    "Bydgoszcz": "Бидгощ",
    "Częstochowa": "Ченстохова",
    "Gdańsk": "Гданськ",
    "Gdynia": "Гдиня",
    "Gliwice": "Гливиці",
    "Katowice": "Катовіце",
    "Kielce": "Кельце",
    "Kraków": "Краків",
    "Lublin": "Люблін",
    "Łódź": "Лодзь",
    "Poznań": "Познань",
    "Radom": "Радом",
    "Rzeszów": "Жешув",
    "Sosnowiec": "Сосновець",
    "Szczecin": "Щецин",
    "Toruń": "Торунь",
    "Warsaw": "Варшава",
    "Wrocław": "Вроцлав",
}

needs_network = pytest.mark.skipif(
    not NETWORK, reason="live Wikimedia data; set VIEWSHIFT_NETWORK_TESTS=1"
)
needs_ground_truth = pytest.mark.skipif(
    not GROUND_TRUTH_DIR, reason="set VIEWSHIFT_GROUND_TRUTH_DIR to the data directory"
)


@pytest.fixture(scope="module")
def live_client(tmp_path_factory):
    from viewshift.wikimedia import FetchPolicy, PageviewClient

    cache = os.environ.get("VIEWSHIFT_CACHE_ROOT") or tmp_path_factory.mktemp("live-cache")
    return PageviewClient(cache, FetchPolicy(user_agent="viewshift acceptance suite"))


def _live_weekly_rc(client, title):
    from viewshift.wikimedia import ArticleKey

    start, end = date(2020, 8, 24), date(2023, 8, 24)
    key = ArticleKey("uk.wikipedia.org", title)
    article = client.fetch_article_views(key, start, end)
    totals = client.fetch_project_totals("uk.wikipedia.org", start, end)
    shares = proportion_of_views(article, totals, Granularity.weekly(start), key=key)
    return relative_change(shares)


@pytest.mark.network
@needs_network
@needs_ground_truth
def test_criterion_10a_poland_rank_correlation(live_client):
    from viewshift.ground_truth import load_ground_truth, load_location_mapping
    from viewshift.ranking import build_rank_comparison
    from viewshift.wikimedia import ArticleKey

    stocks = load_ground_truth(os.path.join(GROUND_TRUTH_DIR, "pesel_stocks.csv"), "stocks_yearly")
    mapping = load_location_mapping(os.path.join(GROUND_TRUTH_DIR, "locations.csv"))
    start, end = date(2022, 1, 1), date(2022, 12, 31)
    totals = live_client.fetch_project_totals("uk.wikipedia.org", start, end)
    shares = {}
    for region, title, project in mapping:
        if project != "uk.wikipedia.org":
            continue
        article = live_client.fetch_article_views(ArticleKey(project, title), start, end)
        yearly = proportion_of_views(article, totals, Granularity.yearly())
        if yearly.points and yearly.points[0][1] is not None:
            shares[region] = yearly.points[0][1]
    comparison = build_rank_comparison(stocks, shares, 2022, "uk")
    report(
        "criterion 10a (Poland 2022 rank correlation)",
        abs(comparison.rho - 0.87) <= 0.05,
        f"rho = {comparison.rho:.3f} (target 0.87 +/- 0.05)",
    )


@pytest.mark.network
@needs_network
def test_criterion_10b_warsaw_break_date(live_client):
    from viewshift.breaks import detect_breaks
    from viewshift.wikimedia import ArticleKey

    start, end = date(2021, 8, 24), date(2022, 8, 24)
    key = ArticleKey("uk.wikipedia.org", "Варшава")
    article = live_client.fetch_article_views(key, start, end)
    totals = live_client.fetch_project_totals("uk.wikipedia.org", start, end)
    shares = proportion_of_views(article, totals, Granularity.daily(), key=key)
    result = detect_breaks(shares, BreakModel(max_breaks=3))
    window = (date(2022, 2, 23), date(2022, 3, 3))
    hit = any(window[0] <= b.date <= window[1] for b in result.breaks)
    report(
        "criterion 10b (Warsaw break date)",
        hit,
        f"breaks at {[b.date.isoformat() for b in result.breaks]} vs window {window}",
    )


@pytest.mark.network
@needs_network
@needs_ground_truth
def test_criterion_10c_katowice_granger(live_client):
    from viewshift.ground_truth import load_ground_truth
    from viewshift.series import align
    from viewshift.wikimedia import ArticleKey

    crossings = load_ground_truth(
        os.path.join(GROUND_TRUTH_DIR, "border_crossings.csv"), "border_crossings_daily"
    ).to_daily_series()
    start, end = date(2022, 2, 24), date(2023, 3, 7)
    key = ArticleKey("uk.wikipedia.org", "Катовіце")
    article = live_client.fetch_article_views(key, start, end)
    totals = live_client.fetch_project_totals("uk.wikipedia.org", start, end)
    shares = proportion_of_views(article, totals, Granularity.daily(), key=key)
    views_daily = DailySeries("views", tuple(shares.present()))
    pair = align(crossings, views_daily)
    result = granger_test(pair, "a->b", 8)
    report(
        "criterion 10c (Katowice Granger F)",
        abs(result.f_stat - 8.73) <= 0.25 * 8.73 and result.p_value < 1e-4,
        f"F = {result.f_stat:.2f} (target 8.73 +/- 25%), p = {result.p_value:.2e}",
    )


@pytest.mark.network
@needs_network
def test_katowice_spike_exceeds_500_percent(live_client):
    from viewshift.metrics import max_relative_change

    rc = _live_weekly_rc(live_client, "Катовіце")
    peak, week = max_relative_change(rc, date(2022, 2, 24), 14)
    report(
        "Katowice invasion-week surge",
        peak > 500.0,
        f"peak {peak:.0f}% in week of {week} (expected > 500%)",
    )


@pytest.mark.network
@needs_network
def test_criterion_10d_polish_city_peaks(live_client):
    from viewshift.metrics import max_relative_change

    failures = []
    for city, title in POLISH_CITIES_UK.items():
        rc = _live_weekly_rc(live_client, title)
        peak, _ = max_relative_change(rc, date(2022, 2, 24), 28)
        if peak < 200.0:
            failures.append((city, round(peak, 1)))
    report(
        "criterion 10d (Polish city peaks >= 200%)",
        not failures,
        f"{len(POLISH_CITIES_UK) - len(failures)}/19 cities >= 200%; below: {failures}",
    )
