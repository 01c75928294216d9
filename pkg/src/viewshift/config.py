"""Pipeline configuration: one JSON document drives every command.

Relative paths are resolved against the directory containing the config file,
so a config plus its data directory is a self-contained, reproducible run.
The cache root may be overridden by the ``VIEWSHIFT_CACHE_ROOT`` environment
variable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

from .breaks import BreakModel
from .errors import ConfigurationError
from .wikimedia import ArticleKey, FetchPolicy

__all__ = ["EconometricsSettings", "GroundTruthSpec", "PipelineConfig"]

_TOP_LEVEL_KEYS = {
    "projects", "articles", "ground_truth", "location_mapping",
    "date_range", "weekly_anchor", "peak_window",
    "breaks", "econometrics", "fetch",
    "cache_root", "output_dir", "seed", "workers",
}


@dataclass(frozen=True)
class GroundTruthSpec:
    path: Path
    kind: str


@dataclass(frozen=True)
class EconometricsSettings:
    p_max: int = 30
    adf_max_lag: int = 10
    significance: float = 0.05

    def __post_init__(self) -> None:
        if self.p_max < 1 or self.adf_max_lag < 0:
            raise ConfigurationError("p_max must be >= 1 and adf_max_lag >= 0")
        if not (0.0 < self.significance < 1.0):
            raise ConfigurationError("significance must be in (0, 1)")


def _parse_date(raw: object, name: str) -> date:
    try:
        return date.fromisoformat(str(raw))
    except ValueError:
        raise ConfigurationError(f"{name} must be an ISO date, got {raw!r}") from None


@dataclass(frozen=True)
class PipelineConfig:
    projects: tuple[str, ...]
    articles: dict[str, tuple[str, ...]]
    ground_truth: tuple[GroundTruthSpec, ...]
    location_mapping: Path | None
    start: date
    end: date
    weekly_anchor: date
    peak_window: tuple[date, int] | None
    breaks: BreakModel
    econometrics: EconometricsSettings
    fetch: FetchPolicy
    cache_root: Path
    output_dir: Path
    seed: int = 42
    workers: int = 4
    base_dir: Path = field(default_factory=Path)

    def __post_init__(self) -> None:
        if self.end < self.start:
            raise ConfigurationError(f"date_range end {self.end} before start {self.start}")
        if self.workers < 1:
            raise ConfigurationError("workers must be >= 1")
        for project in self.articles:
            if project not in self.projects:
                raise ConfigurationError(f"articles listed for unknown project {project!r}")

    def article_keys(self) -> list[ArticleKey]:
        keys = []
        for project in self.projects:
            for title in self.articles.get(project, ()):
                keys.append(ArticleKey(project, title))
        return keys

    def ground_truth_path(self, kind: str) -> Path | None:
        for spec in self.ground_truth:
            if spec.kind == kind:
                return spec.path
        return None

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        path = Path(path)
        if not path.exists():
            raise ConfigurationError(f"config file not found: {path}")
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigurationError("config must be a JSON object")
        unknown = set(raw) - _TOP_LEVEL_KEYS
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        base = path.parent

        def resolve(p: object) -> Path:
            candidate = Path(str(p))
            return candidate if candidate.is_absolute() else base / candidate

        date_range = raw.get("date_range")
        if not isinstance(date_range, dict) or "start" not in date_range or "end" not in date_range:
            raise ConfigurationError("date_range with start and end is required")
        start = _parse_date(date_range["start"], "date_range.start")
        end = _parse_date(date_range["end"], "date_range.end")

        projects = tuple(raw.get("projects", ()))
        articles_raw = raw.get("articles", {})
        if not isinstance(articles_raw, dict):
            raise ConfigurationError("articles must map project -> title list")
        for project, titles in articles_raw.items():
            if isinstance(titles, str) or not isinstance(titles, (list, tuple)):
                raise ConfigurationError(f"articles[{project!r}] must be a list of titles")
        articles = {p: tuple(t) for p, t in articles_raw.items()}

        ground_truth = []
        for entry in raw.get("ground_truth", ()):
            if not isinstance(entry, dict) or "path" not in entry or "kind" not in entry:
                raise ConfigurationError("each ground_truth entry needs path and kind")
            ground_truth.append(GroundTruthSpec(resolve(entry["path"]), str(entry["kind"])))

        peak_window = None
        if raw.get("peak_window") is not None:
            pw = raw["peak_window"]
            if not isinstance(pw, dict) or "start" not in pw or "days" not in pw:
                raise ConfigurationError("peak_window needs start and days")
            peak_window = (_parse_date(pw["start"], "peak_window.start"), int(pw["days"]))
            if peak_window[1] < 1:
                raise ConfigurationError("peak_window.days must be >= 1")

        try:
            breaks = BreakModel(**raw.get("breaks", {}))
            econ = EconometricsSettings(**raw.get("econometrics", {}))
            fetch = FetchPolicy(**raw.get("fetch", {}))
        except TypeError as exc:
            raise ConfigurationError(f"bad settings block: {exc}") from exc

        return cls(
            projects=projects,
            articles=articles,
            ground_truth=tuple(ground_truth),
            location_mapping=resolve(raw["location_mapping"]) if raw.get("location_mapping") else None,
            start=start,
            end=end,
            weekly_anchor=_parse_date(raw["weekly_anchor"], "weekly_anchor") if raw.get("weekly_anchor") else start,
            peak_window=peak_window,
            breaks=breaks,
            econometrics=econ,
            fetch=fetch,
            cache_root=resolve(raw.get("cache_root", "cache")),
            output_dir=resolve(raw.get("output_dir", "out")),
            seed=int(raw.get("seed", 42)),
            workers=int(raw.get("workers", 4)),
            base_dir=base,
        )

    def echo(self) -> str:
        """Canonical JSON rendering embedded in reports for reproducibility."""
        doc = {
            "projects": list(self.projects),
            "articles": {p: list(t) for p, t in sorted(self.articles.items())},
            "ground_truth": [{"path": str(s.path), "kind": s.kind} for s in self.ground_truth],
            "location_mapping": str(self.location_mapping) if self.location_mapping else None,
            "date_range": {"start": self.start.isoformat(), "end": self.end.isoformat()},
            "weekly_anchor": self.weekly_anchor.isoformat(),
            "peak_window": (
                {"start": self.peak_window[0].isoformat(), "days": self.peak_window[1]}
                if self.peak_window else None
            ),
            "breaks": {
                "min_segment_frac": self.breaks.min_segment_frac,
                "max_breaks": self.breaks.max_breaks,
                "confidence_level": self.breaks.confidence_level,
            },
            "econometrics": {
                "p_max": self.econometrics.p_max,
                "adf_max_lag": self.econometrics.adf_max_lag,
                "significance": self.econometrics.significance,
            },
            "seed": self.seed,
        }
        return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False)
