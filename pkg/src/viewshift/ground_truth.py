"""Loaders for ground-truth migration statistics and location mappings.

Two CSV schemas are supported:

* daily border crossings: ``date,count`` with ISO-8601 dates
* yearly stocks: ``region,year,count``

plus the location-mapping CSV ``stock_region,article_title,project`` that ties
stock regions to article titles. All files are UTF-8 with a mandatory header.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from datetime import date
from pathlib import Path

from .errors import ConfigurationError, FormatError, ValidationError
from .series import DailySeries

__all__ = [
    "GroundTruthRow",
    "GroundTruthTable",
    "load_ground_truth",
    "load_location_mapping",
    "KIND_CROSSINGS",
    "KIND_STOCKS",
]

KIND_CROSSINGS = "border_crossings_daily"
KIND_STOCKS = "stocks_yearly"

_HEADERS = {
    KIND_CROSSINGS: ["date", "count"],
    KIND_STOCKS: ["region", "year", "count"],
}


@dataclass(frozen=True)
class GroundTruthRow:
    region: str
    period: date | int  # calendar day for crossings, year for stocks
    count: int


@dataclass(frozen=True)
class GroundTruthTable:
    kind: str
    rows: tuple[GroundTruthRow, ...]

    def __len__(self) -> int:
        return len(self.rows)

    def to_daily_series(self, label: str = "border-crossings") -> DailySeries:
        if self.kind != KIND_CROSSINGS:
            raise ConfigurationError(f"{self.kind} table cannot become a daily series")
        points = sorted((row.period, float(row.count)) for row in self.rows)
        return DailySeries(label, tuple(points))

    def stocks_for_year(self, year: int) -> dict[str, int]:
        if self.kind != KIND_STOCKS:
            raise ConfigurationError(f"{self.kind} table has no yearly stocks")
        return {row.region: row.count for row in self.rows if row.period == year}


def load_ground_truth(path: str | Path, kind: str) -> GroundTruthTable:
    """Parse and validate a ground-truth CSV of the given kind."""
    if kind not in _HEADERS:
        raise ConfigurationError(f"unknown ground-truth kind {kind!r}")
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"ground-truth file not found: {path}")

    expected = _HEADERS[kind]
    rows: list[GroundTruthRow] = []
    seen: set[tuple[str, date | int]] = set()
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError("missing header row", line=1) from None
        if [h.strip() for h in header] != expected:
            raise FormatError(f"expected header {','.join(expected)!r}, got {','.join(header)!r}", line=1)

        for lineno, record in enumerate(reader, start=2):
            if not record:
                continue
            if len(record) != len(expected):
                raise FormatError(f"expected {len(expected)} fields, got {len(record)}", line=lineno)
            if kind == KIND_CROSSINGS:
                region = ""
                try:
                    period: date | int = date.fromisoformat(record[0].strip())
                except ValueError:
                    raise FormatError(f"bad ISO date {record[0]!r}", line=lineno) from None
                raw_count = record[1]
            else:
                region = record[0].strip()
                if not region:
                    raise FormatError("empty region", line=lineno)
                try:
                    period = int(record[1])
                except ValueError:
                    raise FormatError(f"bad year {record[1]!r}", line=lineno) from None
                raw_count = record[2]
            try:
                count = int(raw_count)
            except ValueError:
                raise FormatError(f"bad count {raw_count!r}", line=lineno) from None
            if count < 0:
                raise ValidationError(f"negative count {count} at line {lineno}")
            if (region, period) in seen:
                raise ValidationError(f"duplicate entry for {(region, period)} at line {lineno}")
            seen.add((region, period))
            rows.append(GroundTruthRow(region, period, count))

    return GroundTruthTable(kind, tuple(rows))


def load_location_mapping(path: str | Path) -> list[tuple[str, str, str]]:
    """Read the ``stock_region,article_title,project`` mapping CSV."""
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"location-mapping file not found: {path}")
    entries: list[tuple[str, str, str]] = []
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError("missing header row", line=1) from None
        if [h.strip() for h in header] != ["stock_region", "article_title", "project"]:
            raise FormatError("expected header 'stock_region,article_title,project'", line=1)
        for lineno, record in enumerate(reader, start=2):
            if not record:
                continue
            if len(record) != 3:
                raise FormatError(f"expected 3 fields, got {len(record)}", line=lineno)
            entries.append((record[0].strip(), record[1].strip(), record[2].strip()))
    return entries
