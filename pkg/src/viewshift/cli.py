"""Command-line pipeline: fetch, rank, relchange, breaks, granger, report.

Exit codes: 0 success, 1 partial data failure, 2 configuration error.
Every emitted CSV is UTF-8 with a header row, and repeated runs over an
unchanged cache with the same seed produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

from .config import PipelineConfig
from .errors import (
    ConfigurationError,
    FormatError,
    InsufficientData,
    ValidationError,
    ViewshiftError,
)
from .pipeline import (
    AnalysisRunner,
    article_slug,
    break_rows,
    granger_diag_row,
    granger_rows,
    peak_row,
    rank_rows,
    relchange_rows,
    report_header,
    write_csv,
)
from .ranking import spearman_permutation_pvalue

_GRANGER_HEADER = ["city", "relationship", "optimal_lag", "f_statistic", "p_value"]
_BREAKS_HEADER = ["city", "break_date", "ci_lower", "ci_upper"]
_PEAKS_HEADER = ["article", "language", "peak_rc_percent", "peak_week"]
_RANK_HEADER = ["year", "language", "location", "stock", "share", "rho", "p_value", "p_value_permutation"]
_DIAG_HEADER = [
    "city", "language", "adf_crossings_stat", "adf_views_stat", "selected_lag",
    "lm_p_value", "max_modulus", "stable", "valid", "failed_checks", "halted",
]


def _print_failures(failures: list[tuple[str, str]]) -> None:
    for label, message in failures:
        print(f"error: {label}: {message}", file=sys.stderr)


def cmd_fetch(config: PipelineConfig, args: argparse.Namespace) -> int:
    runner = AnalysisRunner(config)
    client = runner.client
    fetched = cached = 0
    failures: list[tuple[str, str]] = []

    for project in config.projects:
        try:
            if client.project_cached(project, config.start, config.end):
                cached += 1
            else:
                client.fetch_project_totals(project, config.start, config.end)
                fetched += 1
        except ViewshiftError as exc:
            failures.append((f"project-total:{project}", f"{type(exc).__name__}: {exc}"))

    for key in config.article_keys():
        try:
            if client.article_cached(key, config.start, config.end):
                cached += 1
            else:
                client.fetch_article_views(key, config.start, config.end)
                fetched += 1
        except ViewshiftError as exc:
            failures.append((key.label, f"{type(exc).__name__}: {exc}"))

    print(f"{fetched} fetched, {cached} cached")
    _print_failures(failures)
    return 1 if failures else 0


def cmd_rank(config: PipelineConfig, args: argparse.Namespace) -> int:
    if args.year is None or args.language is None:
        raise ConfigurationError("rank requires --year and --language")
    runner = AnalysisRunner(config)
    comparison = runner.rank_comparison(args.year, args.language)
    perm_p = None
    if len(comparison.entries) < 10:
        stocks = [float(s) for _, s, _ in comparison.entries]
        shares = [v for _, _, v in comparison.entries]
        perm_p = spearman_permutation_pvalue(stocks, shares, seed=config.seed)

    out = config.output_dir / f"rank_{args.language}_{args.year}.csv"
    write_csv(out, _RANK_HEADER, [row + (perm_p,) for row in rank_rows(comparison)])

    print(f"rank comparison {args.language} {args.year}: rho={comparison.rho:.4f} p={comparison.p_value:.4g}")
    print(f"{'location':<24}{'stock':>12}{'share':>16}")
    for loc, stock, share in comparison.entries:
        print(f"{loc:<24}{stock:>12}{share:>16.6g}")
    print(f"wrote {out}")
    return 0


def _relchange_products(runner: AnalysisRunner, workers: int | None):
    config = runner.config

    def work(key):
        rc = runner.weekly_relative_change(key)
        return rc, peak_row(key, rc, config.peak_window)

    return runner.run_per_article(work, workers)


def cmd_relchange(config: PipelineConfig, args: argparse.Namespace) -> int:
    runner = AnalysisRunner(config)
    outcomes = _relchange_products(runner, args.workers)
    peaks = []
    failures = []
    for outcome in outcomes:
        if outcome.error is not None:
            failures.append((outcome.key.label, outcome.error))
            continue
        rc, peak = outcome.result
        out = config.output_dir / "relchange" / f"{article_slug(outcome.key)}.csv"
        write_csv(out, ["week_start", "relative_change_percent"], relchange_rows(outcome.key, rc))
        peaks.append(peak)
    write_csv(config.output_dir / "relchange_peaks.csv", _PEAKS_HEADER, peaks)
    print(f"{len(peaks)} relative-change series written, {len(failures)} failed")
    _print_failures(failures)
    return 1 if failures else 0


def cmd_breaks(config: PipelineConfig, args: argparse.Namespace) -> int:
    runner = AnalysisRunner(config)
    outcomes = runner.run_per_article(runner.break_report, args.workers)
    all_rows = []
    failures = []
    for outcome in outcomes:
        if outcome.error is not None:
            failures.append((outcome.key.label, outcome.error))
            continue
        rows = break_rows(outcome.key, outcome.result)
        write_csv(
            config.output_dir / "breaks" / f"{article_slug(outcome.key)}.csv",
            _BREAKS_HEADER,
            rows,
        )
        all_rows.extend(rows)
    write_csv(config.output_dir / "breaks_all.csv", _BREAKS_HEADER, all_rows)
    print(f"{len(outcomes) - len(failures)} break reports written, {len(failures)} failed")
    _print_failures(failures)
    return 1 if failures else 0


def cmd_granger(config: PipelineConfig, args: argparse.Namespace) -> int:
    runner = AnalysisRunner(config)
    crossings = runner.crossings_series()
    outcomes = runner.run_per_article(
        lambda key: runner.granger_record(key, crossings), args.workers
    )
    full, diagnostics, failures = [], [], []
    for outcome in outcomes:
        if outcome.error is not None:
            failures.append((outcome.key.label, outcome.error))
            continue
        full.extend(granger_rows(outcome.key, outcome.result))
        diagnostics.append(granger_diag_row(outcome.key, outcome.result))
    significant = [row for row in full if isinstance(row[4], float) and row[4] < config.econometrics.significance]
    write_csv(config.output_dir / "granger_full.csv", _GRANGER_HEADER, full)
    write_csv(config.output_dir / "granger_significant.csv", _GRANGER_HEADER, significant)
    write_csv(config.output_dir / "granger_diagnostics.csv", _DIAG_HEADER, diagnostics)
    print(
        f"{len(diagnostics)} series analysed, {len(significant)} significant relationships, "
        f"{len(failures)} failed"
    )
    _print_failures(failures)
    return 1 if failures else 0


def cmd_report(config: PipelineConfig, args: argparse.Namespace) -> int:
    runner = AnalysisRunner(config)
    lines = report_header(config)
    failures: list[tuple[str, str]] = []

    # Rank comparisons for every configured language and covered year.
    lines.append("== rank comparisons ==")
    rank_all = []
    languages = sorted({p.split(".", 1)[0] for p in config.projects})
    years = list(range(config.start.year, config.end.year + 1))
    if config.ground_truth_path("stocks_yearly") and config.location_mapping:
        for language in languages:
            for year in years:
                try:
                    comparison = runner.rank_comparison(year, language)
                except (InsufficientData, ViewshiftError) as exc:
                    lines.append(f"{language} {year}: no results ({type(exc).__name__})")
                    continue
                lines.append(
                    f"{language} {year}: rho={comparison.rho:.4f} p={comparison.p_value:.4g} "
                    f"n={len(comparison.entries)}"
                )
                rank_all.extend(row + (None,) for row in rank_rows(comparison))
    else:
        lines.append("no results (stocks or location mapping not configured)")
    write_csv(config.output_dir / "rank_all.csv", _RANK_HEADER, rank_all)

    # Relative-change peaks.
    lines.append("")
    lines.append("== relative-change peaks ==")
    peaks = []
    for outcome in _relchange_products(runner, args.workers):
        if outcome.error is not None:
            failures.append((outcome.key.label, outcome.error))
            lines.append(f"{outcome.key.title} ({outcome.key.language}): failed: {outcome.error}")
            continue
        rc, peak = outcome.result
        write_csv(
            config.output_dir / "relchange" / f"{article_slug(outcome.key)}.csv",
            ["week_start", "relative_change_percent"],
            relchange_rows(outcome.key, rc),
        )
        peaks.append(peak)
        lines.append(
            f"{peak[0]} ({peak[1]}): peak {peak[2]:.1f}% in week of {peak[3]}"
            if peak[2] is not None
            else f"{peak[0]} ({peak[1]}): no data"
        )
    if not peaks and not failures:
        lines.append("no results")
    write_csv(config.output_dir / "relchange_peaks.csv", _PEAKS_HEADER, peaks)

    # Structural breaks.
    lines.append("")
    lines.append("== structural breaks ==")
    break_all = []
    for outcome in runner.run_per_article(runner.break_report, args.workers):
        if outcome.error is not None:
            failures.append((outcome.key.label, outcome.error))
            lines.append(f"{outcome.key.title} ({outcome.key.language}): failed: {outcome.error}")
            continue
        rows = break_rows(outcome.key, outcome.result)
        break_all.extend(rows)
        for row in rows:
            if row[1] is None:
                lines.append(f"{row[0]} ({outcome.key.language}): no breaks")
            else:
                lines.append(
                    f"{row[0]} ({outcome.key.language}): break {row[1]} "
                    f"CI [{row[2] or 'NA'}, {row[3] or 'NA'}]"
                )
    if not break_all and not failures:
        lines.append("no results")
    write_csv(config.output_dir / "breaks_all.csv", _BREAKS_HEADER, break_all)

    # Granger analysis, only when crossings data is configured.
    lines.append("")
    lines.append("== granger causality ==")
    granger_all, granger_diag = [], []
    if config.ground_truth_path("border_crossings_daily"):
        crossings = runner.crossings_series()
        for outcome in runner.run_per_article(
            lambda key: runner.granger_record(key, crossings), args.workers
        ):
            if outcome.error is not None:
                failures.append((outcome.key.label, outcome.error))
                lines.append(f"{outcome.key.title} ({outcome.key.language}): failed: {outcome.error}")
                continue
            rows = granger_rows(outcome.key, outcome.result)
            granger_all.extend(rows)
            granger_diag.append(granger_diag_row(outcome.key, outcome.result))
            for row in rows:
                lines.append(
                    f"{row[0]}: {row[1]} lag={row[2]} F={row[3]:.2f} p={row[4]:.4g}"
                )
            if outcome.result.halted:
                lines.append(f"{outcome.key.title}: halted: {outcome.result.halted}")
        if not granger_all:
            lines.append("no results")
    else:
        lines.append("no results (border crossings not configured)")
    write_csv(config.output_dir / "granger_full.csv", _GRANGER_HEADER, granger_all)
    write_csv(
        config.output_dir / "granger_significant.csv",
        _GRANGER_HEADER,
        [r for r in granger_all if isinstance(r[4], float) and r[4] < config.econometrics.significance],
    )
    write_csv(config.output_dir / "granger_diagnostics.csv", _DIAG_HEADER, granger_diag)

    lines.append("")
    report_path = config.output_dir / "report.txt"
    report_path.parent.mkdir(parents=True, exist_ok=True)
    tmp = report_path.with_name(report_path.name + ".tmp")
    tmp.write_text("\n".join(lines), encoding="utf-8")
    os.replace(tmp, report_path)
    print(f"wrote {report_path}")
    _print_failures(failures)
    return 1 if failures else 0


_COMMANDS = {
    "fetch": cmd_fetch,
    "rank": cmd_rank,
    "relchange": cmd_relchange,
    "breaks": cmd_breaks,
    "granger": cmd_granger,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="viewshift",
        description="Pageview share analytics: fetch, rank, relchange, breaks, granger, report.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", required=True, type=Path)
        cmd.add_argument("--year", type=int, default=None)
        cmd.add_argument("--language", type=str, default=None)
        cmd.add_argument("--seed", type=int, default=None)
        cmd.add_argument("--workers", type=int, default=None)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = PipelineConfig.from_file(args.config)
        if args.seed is not None:
            config = replace(config, seed=args.seed)
        if args.workers is not None:
            config = replace(config, workers=args.workers)
        return _COMMANDS[args.command](config, args)
    except (ConfigurationError, FormatError, ValidationError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except ViewshiftError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
