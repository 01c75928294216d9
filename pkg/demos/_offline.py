"""A canned Wikimedia API double so the demos run without network access.

It answers the same three URL families the real service exposes: per-article
daily views, project-wide daily totals, and the redirect-listing query.
"""

from __future__ import annotations

import re
import urllib.parse
from datetime import date, timedelta

from viewshift.wikimedia import _Response

_ARTICLE = re.compile(r"per-article/([^/]+)/all-access/user/([^/]+)/daily/(\d{8})\d\d/(\d{8})\d\d")
_AGGREGATE = re.compile(r"aggregate/([^/]+)/all-access/user/daily/(\d{8})\d\d/(\d{8})\d\d")


def _d(stamp: str) -> date:
    return date(int(stamp[:4]), int(stamp[4:6]), int(stamp[6:8]))


class OfflineWiki:
    def __init__(self):
        self.articles: dict[tuple[str, str], dict[date, int]] = {}
        self.totals: dict[str, dict[date, int]] = {}
        self.redirects: dict[tuple[str, str], list[str]] = {}
        self.requests_served = 0

    def seed_series(self, project: str, title: str, start: date, values) -> None:
        self.articles[(project, title)] = {
            start + timedelta(days=i): int(v) for i, v in enumerate(values)
        }

    def seed_totals(self, project: str, start: date, values) -> None:
        self.totals[project] = {start + timedelta(days=i): int(v) for i, v in enumerate(values)}

    def __call__(self, url: str, headers) -> _Response:
        self.requests_served += 1
        m = _ARTICLE.search(url)
        if m:
            title = urllib.parse.unquote(m.group(2)).replace("_", " ")
            days = self.articles.get((m.group(1), title))
            return self._items(days, m.group(3), m.group(4))
        m = _AGGREGATE.search(url)
        if m:
            return self._items(self.totals.get(m.group(1)), m.group(2), m.group(3))
        if "/w/api.php" in url:
            query = urllib.parse.parse_qs(urllib.parse.urlparse(url).query)
            project = urllib.parse.urlparse(url).netloc
            titles = self.redirects.get((project, query["titles"][0]), [])
            return _Response(
                200, {"query": {"pages": {"1": {"redirects": [{"title": t} for t in titles]}}}}
            )
        return _Response(404, None)

    @staticmethod
    def _items(days, start, end) -> _Response:
        if not days:
            return _Response(404, None)
        lo, hi = _d(start), _d(end)
        items = [
            {"timestamp": d.strftime("%Y%m%d") + "00", "views": v}
            for d, v in sorted(days.items())
            if lo <= d <= hi
        ]
        return _Response(200, {"items": items}) if items else _Response(404, None)
