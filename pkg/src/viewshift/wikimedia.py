"""Wikimedia pageviews REST client with an on-disk CSV cache.

Requests always use the ``all-access/user/daily`` path so crawler and bot
traffic is excluded. Daily rows are cached one CSV per (project, title) with a
sidecar JSON recording which date ranges have been fetched; days absent from a
fetched range are gaps, never zeros. Redirect handling resolves the redirect
titles through the wiki's query API and sums their daily views onto the
target article's.
"""

from __future__ import annotations

import json
import os
import threading
import time
import urllib.parse
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import date, datetime, timedelta
from pathlib import Path
from typing import Callable, Iterable, Mapping

import requests

from .errors import (
    ArticleUnavailable,
    ConfigurationError,
    ProtocolError,
    RateLimited,
)
from .series import DailySeries

__all__ = [
    "ArticleKey",
    "FetchPolicy",
    "PageviewClient",
    "resolve_cache_root",
    "CACHE_ROOT_ENV",
]

PAGEVIEW_API = "https://wikimedia.org/api/rest_v1/metrics/pageviews"
CACHE_ROOT_ENV = "VIEWSHIFT_CACHE_ROOT"
PROJECT_TOTAL_SLOT = "__project_total__"

ACCESS = "all-access"
AGENT = "user"
API_GRANULARITY = "daily"


@dataclass(frozen=True)
class ArticleKey:
    """One article on one language project, e.g. ``uk.wikipedia.org`` / ``Варшава``."""

    project: str
    title: str

    def __post_init__(self) -> None:
        lang = self.project.split(".", 1)[0]
        if not lang or not lang.isascii() or not lang.islower():
            raise ConfigurationError(f"bad project {self.project!r}: language code must be lowercase ASCII")
        if "." not in self.project:
            raise ConfigurationError(f"bad project {self.project!r}: expected '<lang>.wikipedia.org'")
        if not self.title:
            raise ConfigurationError("article title must be non-empty")

    @property
    def language(self) -> str:
        return self.project.split(".", 1)[0]

    @property
    def label(self) -> str:
        return f"{self.project}/{self.title}"


@dataclass(frozen=True)
class FetchPolicy:
    """Client etiquette knobs. Access/agent/granularity are fixed by design."""

    redirects: bool = True
    max_concurrent: int = 4
    min_request_spacing: float = 0.25
    max_retries: int = 3
    backoff_base: float = 1.0
    user_agent: str = "viewshift/0.1 (pageview analytics toolkit)"

    def __post_init__(self) -> None:
        if self.max_concurrent < 1:
            raise ConfigurationError("max_concurrent must be >= 1")
        if self.min_request_spacing < 0:
            raise ConfigurationError("min_request_spacing must be >= 0")
        if not self.user_agent.strip():
            raise ConfigurationError("a User-Agent string is mandatory")


def resolve_cache_root(explicit: str | Path | None = None) -> Path:
    """Cache root resolution: environment variable beats the explicit setting."""
    env = os.environ.get(CACHE_ROOT_ENV)
    if env:
        return Path(env)
    if explicit is not None:
        return Path(explicit)
    return Path.home() / ".cache" / "viewshift"


def _title_slot(title: str) -> str:
    return urllib.parse.quote(title, safe="")


def _api_title(title: str) -> str:
    return urllib.parse.quote(title.replace(" ", "_"), safe="")


def _parse_day(stamp: str) -> date:
    # REST timestamps look like "2022022400": YYYYMMDD plus a "00" hour field.
    return datetime.strptime(stamp[:8], "%Y%m%d").date()


class _CacheEntry:
    """Daily rows plus fetched-range bookkeeping for one (project, title)."""

    def __init__(self, root: Path, project: str, title_slot: str):
        base = root / project
        self.csv_path = base / f"{title_slot}.csv"
        self.ranges_path = base / f"{title_slot}.ranges.json"

    def fetched_ranges(self) -> list[tuple[date, date]]:
        if not self.ranges_path.exists():
            return []
        raw = json.loads(self.ranges_path.read_text(encoding="utf-8"))
        return [(date.fromisoformat(lo), date.fromisoformat(hi)) for lo, hi in raw]

    def covers(self, start: date, end: date) -> bool:
        cursor = start
        for lo, hi in self.fetched_ranges():
            if lo > cursor:
                return False
            if hi >= cursor:
                cursor = hi + timedelta(days=1)
            if cursor > end:
                return True
        return cursor > end

    def load_days(self) -> dict[date, float]:
        if not self.csv_path.exists():
            return {}
        days: dict[date, float] = {}
        with self.csv_path.open(encoding="utf-8") as fh:
            header = fh.readline()
            if header.strip() != "date,views":
                raise ProtocolError(f"corrupt cache file {self.csv_path}")
            for line in fh:
                d, v = line.strip().split(",")
                days[date.fromisoformat(d)] = float(v)
        return days

    def merge(self, days: Mapping[date, float], fetched: tuple[date, date]) -> None:
        merged = self.load_days()
        merged.update(days)
        ranges = self.fetched_ranges() + [fetched]
        ranges.sort()
        coalesced: list[tuple[date, date]] = []
        for lo, hi in ranges:
            if coalesced and lo <= coalesced[-1][1] + timedelta(days=1):
                prev_lo, prev_hi = coalesced[-1]
                coalesced[-1] = (prev_lo, max(prev_hi, hi))
            else:
                coalesced.append((lo, hi))

        self.csv_path.parent.mkdir(parents=True, exist_ok=True)
        # keep whole counts as plain integers so cache files diff cleanly
        _atomic_write(
            self.csv_path,
            "date,views\n"
            + "".join(
                f"{d.isoformat()},{int(merged[d]) if merged[d] == int(merged[d]) else merged[d]!r}\n"
                for d in sorted(merged)
            ),
        )
        _atomic_write(
            self.ranges_path,
            json.dumps([[lo.isoformat(), hi.isoformat()] for lo, hi in coalesced]),
        )


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


class _RateLimiter:
    """Serializes request starts so consecutive starts are >= spacing apart."""

    def __init__(self, spacing: float):
        self.spacing = spacing
        self._lock = threading.Lock()
        self._last_start = -float("inf")

    def wait(self) -> None:
        while True:
            with self._lock:
                now = time.monotonic()
                wake = self._last_start + self.spacing
                if now >= wake:
                    self._last_start = now
                    return
            time.sleep(max(wake - time.monotonic(), 0.0))


@dataclass
class _Response:
    status: int
    data: object


TransportFn = Callable[[str, Mapping[str, str]], _Response]


def _requests_transport(session: requests.Session) -> TransportFn:
    def call(url: str, headers: Mapping[str, str]) -> _Response:
        try:
            resp = session.get(url, headers=dict(headers), timeout=30)
        except requests.RequestException as exc:
            raise ProtocolError(f"transport failure for {url}: {exc}") from exc
        try:
            data = resp.json() if resp.content else {}
        except ValueError:
            data = None
        return _Response(resp.status_code, data)

    return call


class PageviewClient:
    """Fetch per-article and project-total daily pageviews with caching.

    ``transport`` may be replaced for testing; it receives (url, headers) and
    returns a status/data pair. At most ``policy.max_concurrent`` requests are
    in flight and consecutive request starts are separated by at least
    ``policy.min_request_spacing`` seconds.
    """

    def __init__(
        self,
        cache_root: str | Path | None = None,
        policy: FetchPolicy | None = None,
        transport: TransportFn | None = None,
    ):
        self.policy = policy or FetchPolicy()
        self.cache_root = resolve_cache_root(cache_root)
        if transport is None:
            transport = _requests_transport(requests.Session())
        self._transport = transport
        self._limiter = _RateLimiter(self.policy.min_request_spacing)
        self._in_flight = threading.BoundedSemaphore(self.policy.max_concurrent)
        self._cache_lock = threading.Lock()

    # ------------------------------------------------------------------ HTTP

    def _request(self, url: str) -> object:
        headers = {"User-Agent": self.policy.user_agent, "Accept": "application/json"}
        last_failure: Exception | None = None
        for attempt in range(self.policy.max_retries + 1):
            if attempt:
                time.sleep(self.policy.backoff_base * 2 ** (attempt - 1))
            try:
                with self._in_flight:
                    self._limiter.wait()
                    resp = self._transport(url, headers)
            except ProtocolError as exc:
                last_failure = exc
                continue
            if resp.status == 200:
                return resp.data
            if resp.status == 404:
                raise ArticleUnavailable(url)
            if resp.status == 429:
                last_failure = RateLimited(url)
                continue
            last_failure = ProtocolError(f"HTTP {resp.status} for {url}")
        if isinstance(last_failure, RateLimited):
            raise last_failure
        raise ProtocolError(f"no successful response for {url}: {last_failure}")

    def _fetch_days(self, url: str) -> dict[date, float]:
        data = self._request(url)
        try:
            items = data["items"]  # type: ignore[index]
            days = {_parse_day(item["timestamp"]): float(item["views"]) for item in items}
        except (TypeError, KeyError, ValueError) as exc:
            raise ProtocolError(f"malformed pageview payload from {url}: {exc}") from exc
        return days

    # ----------------------------------------------------------------- cache

    def _cached_days(
        self, project: str, title_slot: str, url: str, start: date, end: date, missing_ok: bool
    ) -> dict[date, float]:
        entry = _CacheEntry(self.cache_root, project, title_slot)
        with self._cache_lock:
            if entry.covers(start, end):
                return {d: v for d, v in entry.load_days().items() if start <= d <= end}
        try:
            days = self._fetch_days(url)
        except ArticleUnavailable:
            if not missing_ok:
                raise
            days = {}
        days = {d: v for d, v in days.items() if start <= d <= end}
        with self._cache_lock:
            entry.merge(days, (start, end))
        return days

    # ------------------------------------------------------------------- API

    def article_url(self, key: ArticleKey, start: date, end: date) -> str:
        return (
            f"{PAGEVIEW_API}/per-article/{key.project}/{ACCESS}/{AGENT}/"
            f"{_api_title(key.title)}/{API_GRANULARITY}/"
            f"{start.strftime('%Y%m%d')}00/{end.strftime('%Y%m%d')}00"
        )

    def project_url(self, project: str, start: date, end: date) -> str:
        return (
            f"{PAGEVIEW_API}/aggregate/{project}/{ACCESS}/{AGENT}/{API_GRANULARITY}/"
            f"{start.strftime('%Y%m%d')}00/{end.strftime('%Y%m%d')}00"
        )

    def redirect_titles(self, key: ArticleKey) -> list[str]:
        """Titles redirecting to ``key.title``, resolved via the wiki query API and cached."""
        entry_path = self.cache_root / key.project / f"{_title_slot(key.title)}.redirects.json"
        with self._cache_lock:
            if entry_path.exists():
                return json.loads(entry_path.read_text(encoding="utf-8"))

        titles: list[str] = []
        cont: dict[str, str] = {}
        while True:
            params = {
                "action": "query",
                "format": "json",
                "prop": "redirects",
                "rdlimit": "max",
                "titles": key.title,
                **cont,
            }
            url = f"https://{key.project}/w/api.php?{urllib.parse.urlencode(params)}"
            data = self._request(url)
            try:
                pages = data["query"]["pages"]  # type: ignore[index]
                for page in pages.values():
                    titles.extend(r["title"] for r in page.get("redirects", []))
            except (TypeError, KeyError) as exc:
                raise ProtocolError(f"malformed redirect payload from {url}: {exc}") from exc
            cont = data.get("continue", {}) if isinstance(data, dict) else {}
            if not cont:
                break

        with self._cache_lock:
            entry_path.parent.mkdir(parents=True, exist_ok=True)
            _atomic_write(entry_path, json.dumps(titles, ensure_ascii=False))
        return titles

    def article_cached(self, key: ArticleKey, start: date, end: date) -> bool:
        """True when a fetch for this key/range would touch the network zero times."""
        if not _CacheEntry(self.cache_root, key.project, _title_slot(key.title)).covers(start, end):
            return False
        if not self.policy.redirects:
            return True
        redirects_path = self.cache_root / key.project / f"{_title_slot(key.title)}.redirects.json"
        if not redirects_path.exists():
            return False
        titles = json.loads(redirects_path.read_text(encoding="utf-8"))
        return all(
            _CacheEntry(self.cache_root, key.project, _title_slot(t)).covers(start, end)
            for t in titles
        )

    def project_cached(self, project: str, start: date, end: date) -> bool:
        return _CacheEntry(self.cache_root, project, PROJECT_TOTAL_SLOT).covers(start, end)

    def fetch_article_views(self, key: ArticleKey, start: date, end: date) -> DailySeries:
        """Daily user pageviews for one article, redirect titles summed in when enabled."""
        if end < start:
            raise ConfigurationError(f"end {end} is before start {start}")
        days = dict(
            self._cached_days(
                key.project, _title_slot(key.title), self.article_url(key, start, end),
                start, end, missing_ok=False,
            )
        )
        if self.policy.redirects:
            for title in self.redirect_titles(key):
                rkey = ArticleKey(key.project, title)
                extra = self._cached_days(
                    key.project, _title_slot(title), self.article_url(rkey, start, end),
                    start, end, missing_ok=True,
                )
                for d, v in extra.items():
                    days[d] = days.get(d, 0.0) + v
        return DailySeries(key.label, tuple(sorted(days.items())))

    def fetch_project_totals(self, project: str, start: date, end: date) -> DailySeries:
        """Daily project-wide user pageview totals (the view-share denominator)."""
        if end < start:
            raise ConfigurationError(f"end {end} is before start {start}")
        days = self._cached_days(
            project, PROJECT_TOTAL_SLOT, self.project_url(project, start, end),
            start, end, missing_ok=False,
        )
        return DailySeries(f"project-total:{project}", tuple(sorted(days.items())))

    def fetch_many(
        self, keys: Iterable[ArticleKey], start: date, end: date
    ) -> dict[ArticleKey, DailySeries | Exception]:
        """Fetch several articles concurrently, collecting per-key failures."""
        keys = list(keys)
        results: dict[ArticleKey, DailySeries | Exception] = {}
        if not keys:
            return results
        with ThreadPoolExecutor(max_workers=self.policy.max_concurrent) as pool:
            futures = {pool.submit(self.fetch_article_views, k, start, end): k for k in keys}
            for fut, k in futures.items():
                try:
                    results[k] = fut.result()
                except Exception as exc:  # noqa: BLE001 - collected for the caller
                    results[k] = exc
        return results
