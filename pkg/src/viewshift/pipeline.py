"""Config-driven orchestration shared by the CLI commands.

The runner turns cached pageview data into the derived products each command
emits: daily/weekly/yearly shares, relative-change series and peaks, break
reports, and two-way Granger records. Output files are written atomically,
always UTF-8 with a header row, and all orderings are deterministic.
"""

from __future__ import annotations

import hashlib
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Callable, Iterable, Sequence, TypeVar

from . import __version__
from .breaks import BreakModel, BreakReport, detect_breaks
from .config import PipelineConfig
from .econometrics import GrangerPipelineResult, run_granger_pipeline
from .errors import ConfigurationError, ViewshiftError
from .ground_truth import (
    KIND_CROSSINGS,
    KIND_STOCKS,
    load_ground_truth,
    load_location_mapping,
)
from .metrics import (
    ProportionSeries,
    RelativeChangeSeries,
    max_relative_change,
    proportion_of_views,
    relative_change,
)
from .ranking import RankComparison, build_rank_comparison
from .series import DailySeries, Granularity
from .wikimedia import ArticleKey, PageviewClient, _title_slot

T = TypeVar("T")


def fmt(value: object) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    if value is None:
        return "NA"
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[object]]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    text = ",".join(header) + "\n"
    for row in rows:
        text += ",".join(fmt(v) for v in row) + "\n"
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


@dataclass
class TaskOutcome:
    key: ArticleKey
    result: object | None
    error: str | None


class AnalysisRunner:
    """Cache-backed computations for one pipeline configuration."""

    def __init__(self, config: PipelineConfig, client: PageviewClient | None = None):
        self.config = config
        self.client = client or PageviewClient(config.cache_root, config.fetch)
        self._totals: dict[str, DailySeries] = {}

    # ------------------------------------------------------------- raw data

    def totals(self, project: str) -> DailySeries:
        if project not in self._totals:
            self._totals[project] = self.client.fetch_project_totals(
                project, self.config.start, self.config.end
            )
        return self._totals[project]

    def article(self, key: ArticleKey) -> DailySeries:
        return self.client.fetch_article_views(key, self.config.start, self.config.end)

    # ------------------------------------------------------------- products

    def daily_shares(self, key: ArticleKey) -> ProportionSeries:
        return proportion_of_views(
            self.article(key), self.totals(key.project), Granularity.daily(), key=key
        )

    def weekly_shares(self, key: ArticleKey) -> ProportionSeries:
        g = Granularity.weekly(self.config.weekly_anchor)
        return proportion_of_views(self.article(key), self.totals(key.project), g, key=key)

    def yearly_share(self, key: ArticleKey, year: int) -> float | None:
        shares = proportion_of_views(
            self.article(key), self.totals(key.project), Granularity.yearly(), key=key
        )
        for d, v in shares.points:
            if d.year == year:
                return v
        return None

    def weekly_relative_change(self, key: ArticleKey) -> RelativeChangeSeries:
        return relative_change(self.weekly_shares(key))

    def break_report(self, key: ArticleKey) -> BreakReport:
        model = BreakModel(
            series_key=key.label,
            min_segment_frac=self.config.breaks.min_segment_frac,
            max_breaks=self.config.breaks.max_breaks,
            confidence_level=self.config.breaks.confidence_level,
        )
        return detect_breaks(self.daily_shares(key), model)

    def granger_record(self, key: ArticleKey, crossings: DailySeries) -> GrangerPipelineResult:
        econ = self.config.econometrics
        return run_granger_pipeline(
            self.daily_shares(key),
            crossings,
            p_max=econ.p_max,
            adf_max_lag=econ.adf_max_lag,
            significance=econ.significance,
        )

    def rank_comparison(self, year: int, language: str) -> RankComparison:
        stocks_path = self.config.ground_truth_path(KIND_STOCKS)
        if stocks_path is None:
            raise ConfigurationError("no stocks_yearly ground truth configured")
        if self.config.location_mapping is None:
            raise ConfigurationError("no location_mapping configured")
        stocks = load_ground_truth(stocks_path, KIND_STOCKS)
        mapping = load_location_mapping(self.config.location_mapping)
        shares: dict[str, float] = {}
        for region, title, project in mapping:
            if project.split(".", 1)[0] != language:
                continue
            value = self.yearly_share(ArticleKey(project, title), year)
            if value is not None:
                shares[region] = value
        return build_rank_comparison(stocks, shares, year, language)

    def crossings_series(self) -> DailySeries:
        path = self.config.ground_truth_path(KIND_CROSSINGS)
        if path is None:
            raise ConfigurationError("no border_crossings_daily ground truth configured")
        return load_ground_truth(path, KIND_CROSSINGS).to_daily_series()

    # ----------------------------------------------------------- fan-out

    def run_per_article(
        self, work: Callable[[ArticleKey], T], workers: int | None = None
    ) -> list[TaskOutcome]:
        """Apply ``work`` to every configured article, collecting failures.

        Results come back sorted by (title, project) regardless of completion
        order so downstream files are deterministic.
        """
        keys = self.config.article_keys()
        outcomes: list[TaskOutcome] = []
        n_workers = workers or self.config.workers

        def attempt(key: ArticleKey) -> TaskOutcome:
            try:
                return TaskOutcome(key, work(key), None)
            except ViewshiftError as exc:
                return TaskOutcome(key, None, f"{type(exc).__name__}: {exc}")

        if n_workers == 1 or len(keys) <= 1:
            outcomes = [attempt(k) for k in keys]
        else:
            with ThreadPoolExecutor(max_workers=n_workers) as pool:
                outcomes = list(pool.map(attempt, keys))
        outcomes.sort(key=lambda o: (o.key.title, o.key.project))
        return outcomes


# ------------------------------------------------------------------ outputs

def article_slug(key: ArticleKey) -> str:
    return f"{key.project}_{_title_slot(key.title)}"


def relchange_rows(key: ArticleKey, rc: RelativeChangeSeries) -> list[tuple[object, ...]]:
    return [(d.isoformat(), v) for d, v in rc.points]


def peak_row(
    key: ArticleKey, rc: RelativeChangeSeries, window: tuple[date, int] | None
) -> tuple[object, ...]:
    if window is None:
        present = rc.present()
        if not present:
            return (key.title, key.language, None, None)
        start = present[0][0]
        length = (present[-1][0] - start).days + 1
    else:
        start, length = window
    peak, week = max_relative_change(rc, start, length)
    return (key.title, key.language, peak, week.isoformat())


def break_rows(key: ArticleKey, report: BreakReport) -> list[tuple[object, ...]]:
    rows = []
    for estimate in report.breaks:
        rows.append(
            (
                key.title,
                estimate.date.isoformat(),
                estimate.ci_lower.isoformat() if estimate.ci_lower else None,
                estimate.ci_upper.isoformat() if estimate.ci_upper else None,
            )
        )
    if not rows:
        rows.append((key.title, None, None, None))
    return rows


def granger_rows(key: ArticleKey, record: GrangerPipelineResult) -> list[tuple[object, ...]]:
    rows = []
    for result in (record.granger_crossings_to_views, record.granger_views_to_crossings):
        if result is None:
            continue
        rows.append(
            (
                key.title,
                f"{result.cause} -> {result.effect}",
                result.lag,
                result.f_stat,
                result.p_value,
            )
        )
    return rows


def granger_diag_row(key: ArticleKey, record: GrangerPipelineResult) -> tuple[object, ...]:
    return (
        key.title,
        key.language,
        record.adf_crossings.statistic if record.adf_crossings else None,
        record.adf_views.statistic if record.adf_views else None,
        record.selected_lag,
        record.lm_p_value,
        record.max_modulus,
        record.stable,
        record.valid,
        ";".join(record.diagnostics_failed),
        record.halted,
    )


def rank_rows(comparison: RankComparison) -> list[tuple[object, ...]]:
    return [
        (comparison.year, comparison.language, loc, stock, share,
         comparison.rho, comparison.p_value)
        for loc, stock, share in comparison.entries
    ]


def cache_fingerprint(cache_root: Path) -> tuple[int, str]:
    """(file count, combined digest) over the cache; wall-clock free."""
    digest = hashlib.sha256()
    count = 0
    if cache_root.exists():
        for path in sorted(cache_root.rglob("*")):
            if path.is_file():
                digest.update(str(path.relative_to(cache_root)).encode("utf-8"))
                digest.update(path.read_bytes())
                count += 1
    return count, digest.hexdigest()


def report_header(config: PipelineConfig) -> list[str]:
    count, fingerprint = cache_fingerprint(config.cache_root)
    return [
        f"viewshift report (tool version {__version__})",
        f"data snapshot: {count} cached files, fingerprint {fingerprint[:16]}",
        "",
        "configuration:",
        *("  " + line for line in config.echo().splitlines()),
        "",
    ]
