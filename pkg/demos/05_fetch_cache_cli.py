"""The ingest client, the on-disk cache, and the end-to-end CLI.

Runs entirely offline against a canned API double; pass ``--live`` to point
the same code at the real Wikimedia REST API instead (be polite: the default
policy spaces requests and sends a proper User-Agent).
"""

import json
import sys
import tempfile
from datetime import date, timedelta
from pathlib import Path

import numpy as np

from _offline import OfflineWiki
from viewshift import ArticleKey, FetchPolicy, PageviewClient
from viewshift.cli import main as viewshift_main

LIVE = "--live" in sys.argv
PROJECT = "uk.wikipedia.org"
START, DAYS = date(2022, 1, 1), 420
END = START + timedelta(days=DAYS - 1)

workdir = Path(tempfile.mkdtemp(prefix="viewshift-demo-"))
cache = workdir / "cache"
print(f"working directory: {workdir}")

if LIVE:
    client = PageviewClient(cache, FetchPolicy(user_agent="viewshift demo script"))
    titles = ["Варшава"]
else:
    rng = np.random.default_rng(2)
    wiki = OfflineWiki()
    wiki.seed_totals(PROJECT, START, rng.integers(4e7, 6e7, size=DAYS))
    jump = np.where(np.arange(DAYS) >= 300, 2500, 300)
    wiki.seed_series(PROJECT, "Варшава", START, jump + rng.integers(0, 80, size=DAYS))
    wiki.seed_series(PROJECT, "Варшава (столиця)", START, rng.integers(0, 40, size=DAYS))
    wiki.redirects[(PROJECT, "Варшава")] = ["Варшава (столиця)"]
    client = PageviewClient(cache, FetchPolicy(user_agent="demo", min_request_spacing=0.0), transport=wiki)
    titles = ["Варшава"]

key = ArticleKey(PROJECT, titles[0])
series = client.fetch_article_views(key, START, END)
totals = client.fetch_project_totals(PROJECT, START, END)
print(f"fetched {len(series)} article days and {len(totals)} total days")

# Second fetch is served from the CSV cache: no requests at all.
before = None if LIVE else wiki.requests_served
client.fetch_article_views(key, START, END)
if not LIVE:
    print(f"requests served by the API double: {wiki.requests_served} "
          f"(unchanged after refetch: {wiki.requests_served == before})")

cached_files = sorted(p.name for p in (cache / PROJECT).glob("*"))
print("cache layout:", cached_files)

# The same cache drives the CLI. With everything already cached the commands
# are fully offline and deterministic.
config = {
    "projects": [PROJECT],
    "articles": {PROJECT: titles},
    "date_range": {"start": START.isoformat(), "end": END.isoformat()},
    "breaks": {"max_breaks": 2},
    "econometrics": {"p_max": 5, "adf_max_lag": 4},
    "fetch": {"user_agent": "viewshift demo script", "redirects": not LIVE and True},
    "cache_root": str(cache),
    "output_dir": str(workdir / "out"),
}
config_path = workdir / "config.json"
config_path.write_text(json.dumps(config, indent=2, ensure_ascii=False), encoding="utf-8")

print("\n$ viewshift fetch --config config.json")
viewshift_main(["fetch", "--config", str(config_path)])
print("\n$ viewshift breaks --config config.json")
viewshift_main(["breaks", "--config", str(config_path)])

breaks_csv = workdir / "out" / "breaks_all.csv"
print(f"\n{breaks_csv.name}:")
print(breaks_csv.read_text(encoding="utf-8"))
