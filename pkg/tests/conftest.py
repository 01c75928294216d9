"""Shared fixtures: a fake Wikimedia transport and a synthetic analysis world.

The fake transport answers per-article, aggregate, and redirect-query URLs
from in-memory tables so ingest and CLI behaviour can be exercised with zero
network. The "world" fixture builds a complete cache + config + ground-truth
directory whose series have known analytic properties (flat relative change,
a step break, a lagged coupling to border crossings).
"""

from __future__ import annotations

import json
import re
import threading
import time
import urllib.parse
from datetime import date, timedelta
from pathlib import Path

import numpy as np
import pytest

from viewshift.wikimedia import ArticleKey, FetchPolicy, PageviewClient, _Response

START = date(2021, 1, 4)
N_DAYS = 756  # exactly 108 seven-day weeks
END = START + timedelta(days=N_DAYS - 1)
CROSSINGS_START = date(2022, 2, 24)
TOTAL_VIEWS = 1_000_000.0

_ARTICLE_RE = re.compile(
    r"per-article/(?P<project>[^/]+)/all-access/user/(?P<title>[^/]+)/daily/(?P<start>\d{8})\d\d/(?P<end>\d{8})\d\d"
)
_AGGREGATE_RE = re.compile(
    r"aggregate/(?P<project>[^/]+)/all-access/user/daily/(?P<start>\d{8})\d\d/(?P<end>\d{8})\d\d"
)


def _stamp(d: date) -> str:
    return d.strftime("%Y%m%d") + "00"


class FakeWiki:
    """In-memory Wikimedia API double; also records every request."""

    def __init__(self):
        self.articles: dict[tuple[str, str], dict[date, float]] = {}
        self.totals: dict[str, dict[date, float]] = {}
        self.redirects: dict[tuple[str, str], list[str]] = {}
        self.calls: list[str] = []
        self.call_times: list[float] = []
        self.in_flight = 0
        self.max_in_flight = 0
        self.latency = 0.0
        self.fail_with: int | None = None
        self._lock = threading.Lock()

    def add_article(self, project: str, title: str, days: dict[date, float]) -> None:
        self.articles[(project, title)] = days

    def add_totals(self, project: str, days: dict[date, float]) -> None:
        self.totals[project] = days

    def __call__(self, url: str, headers) -> _Response:
        with self._lock:
            self.calls.append(url)
            self.call_times.append(time.monotonic())
            self.in_flight += 1
            self.max_in_flight = max(self.max_in_flight, self.in_flight)
        try:
            if self.latency:
                time.sleep(self.latency)
            if self.fail_with is not None:
                return _Response(self.fail_with, None)
            return self._answer(url)
        finally:
            with self._lock:
                self.in_flight -= 1

    def _answer(self, url: str) -> _Response:
        m = _ARTICLE_RE.search(url)
        if m:
            title = urllib.parse.unquote(m.group("title")).replace("_", " ")
            days = self.articles.get((m.group("project"), title))
            if days is None:
                # try the underscore form verbatim
                days = self.articles.get((m.group("project"), urllib.parse.unquote(m.group("title"))))
            if days is None:
                return _Response(404, None)
            return self._items(days, m.group("start"), m.group("end"))
        m = _AGGREGATE_RE.search(url)
        if m:
            days = self.totals.get(m.group("project"))
            if days is None:
                return _Response(404, None)
            return self._items(days, m.group("start"), m.group("end"))
        if "/w/api.php" in url:
            query = urllib.parse.parse_qs(urllib.parse.urlparse(url).query)
            title = query["titles"][0]
            project = urllib.parse.urlparse(url).netloc
            redirect_titles = self.redirects.get((project, title), [])
            return _Response(
                200,
                {"query": {"pages": {"1": {"redirects": [{"title": t} for t in redirect_titles]}}}},
            )
        return _Response(404, None)

    @staticmethod
    def _items(days: dict[date, float], start: str, end: str) -> _Response:
        lo = date(int(start[:4]), int(start[4:6]), int(start[6:8]))
        hi = date(int(end[:4]), int(end[4:6]), int(end[6:8]))
        items = [
            {"timestamp": _stamp(d), "views": int(v)}
            for d, v in sorted(days.items())
            if lo <= d <= hi
        ]
        if not items:
            return _Response(404, None)
        return _Response(200, {"items": items})


def fast_policy(**overrides) -> FetchPolicy:
    defaults = dict(
        redirects=False,
        max_concurrent=4,
        min_request_spacing=0.0,
        max_retries=0,
        backoff_base=0.001,
        user_agent="viewshift-tests",
    )
    defaults.update(overrides)
    return FetchPolicy(**defaults)


def build_world() -> FakeWiki:
    """Synthetic project with three articles of known analytic behaviour."""
    wiki = FakeWiki()
    project = "uk.wikipedia.org"
    days = [START + timedelta(days=i) for i in range(N_DAYS)]
    wiki.add_totals(project, {d: TOTAL_VIEWS for d in days})

    # Alpha: 7-day periodic, hence identical year over year -> relative change 0.
    wiki.add_article(project, "Alpha", {d: 100.0 + (i % 7) * 10.0 for i, d in enumerate(days)})

    # Beta: step from 50 to 500 at a known date -> one structural break.
    beta_jump = START + timedelta(days=400)
    beta_rng = np.random.default_rng(13)
    wiki.add_article(
        project,
        "Beta",
        {
            d: (500.0 if d >= beta_jump else 50.0) + float(beta_rng.integers(0, 10))
            for d in days
        },
    )

    # Gamma: coupled to border crossings two days back once crossings begin.
    crossings = crossing_counts()
    gamma = {}
    rng = np.random.default_rng(7)
    for i, d in enumerate(days):
        driver = crossings.get(d - timedelta(days=2))
        base = 200.0 + rng.integers(0, 20)
        gamma[d] = base + (0.5 * driver if driver is not None else 0.0)
    wiki.add_article(project, "Gamma", gamma)

    # Short: present in the cache but with data on only a few weeks.
    wiki.add_article(
        project, "Short", {START + timedelta(days=i): 40.0 for i in range(30)}
    )
    return wiki


def crossing_counts() -> dict[date, int]:
    rng = np.random.default_rng(11)
    n = (END - CROSSINGS_START).days + 1
    z = np.zeros(n)
    for t in range(1, n):
        z[t] = 0.5 * z[t - 1] + rng.standard_normal()
    return {
        CROSSINGS_START + timedelta(days=i): int(max(0, round(1000 + 300 * z[i])))
        for i in range(n)
    }


def write_ground_truth(data_dir: Path) -> None:
    data_dir.mkdir(parents=True, exist_ok=True)
    crossings = crossing_counts()
    lines = ["date,count"] + [f"{d.isoformat()},{v}" for d, v in sorted(crossings.items())]
    (data_dir / "crossings.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    stocks = ["region,year,count"]
    for year in (2021, 2022):
        stocks += [f"A-city,{year},1000", f"B-city,{year},5000", f"G-city,{year},9000"]
    (data_dir / "stocks.csv").write_text("\n".join(stocks) + "\n", encoding="utf-8")

    mapping = [
        "stock_region,article_title,project",
        "A-city,Alpha,uk.wikipedia.org",
        "B-city,Beta,uk.wikipedia.org",
        "G-city,Gamma,uk.wikipedia.org",
    ]
    (data_dir / "locations.csv").write_text("\n".join(mapping) + "\n", encoding="utf-8")


def write_config(base: Path, cache_root: Path, out_dir: Path, articles: list[str]) -> Path:
    config = {
        "projects": ["uk.wikipedia.org"],
        "articles": {"uk.wikipedia.org": articles},
        "ground_truth": [
            {"path": "data/stocks.csv", "kind": "stocks_yearly"},
            {"path": "data/crossings.csv", "kind": "border_crossings_daily"},
        ],
        "location_mapping": "data/locations.csv",
        "date_range": {"start": START.isoformat(), "end": END.isoformat()},
        "weekly_anchor": START.isoformat(),
        "peak_window": {"start": (START + timedelta(days=399)).isoformat(), "days": 28},
        "breaks": {"min_segment_frac": 0.15, "max_breaks": 2},
        "econometrics": {"p_max": 5, "adf_max_lag": 4, "significance": 0.05},
        "fetch": {
            "redirects": False,
            "max_retries": 0,
            "backoff_base": 0.001,
            "min_request_spacing": 0.0,
            "user_agent": "viewshift-tests",
        },
        "cache_root": str(cache_root),
        "output_dir": str(out_dir),
        "seed": 42,
        "workers": 2,
    }
    path = base / "config.json"
    path.write_text(json.dumps(config, indent=2), encoding="utf-8")
    return path


def populate_cache(wiki: FakeWiki, cache_root: Path, articles: list[str]) -> None:
    client = PageviewClient(cache_root, fast_policy(), transport=wiki)
    client.fetch_project_totals("uk.wikipedia.org", START, END)
    for title in articles:
        client.fetch_article_views(ArticleKey("uk.wikipedia.org", title), START, END)


@pytest.fixture(scope="session")
def world(tmp_path_factory):
    """Fully populated cache + config + ground truth for the synthetic project."""
    base = tmp_path_factory.mktemp("world")
    wiki = build_world()
    articles = ["Alpha", "Beta", "Gamma"]
    cache_root = base / "cache"
    populate_cache(wiki, cache_root, articles + ["Short"])
    write_ground_truth(base / "data")
    config_path = write_config(base, cache_root, base / "out", articles)
    return {
        "base": base,
        "wiki": wiki,
        "config_path": config_path,
        "cache_root": cache_root,
        "out_dir": base / "out",
        "articles": articles,
    }


@pytest.fixture(autouse=True)
def _no_cache_env(monkeypatch):
    monkeypatch.delenv("VIEWSHIFT_CACHE_ROOT", raising=False)
