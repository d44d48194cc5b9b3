"""Report tables and their CSV/JSON writers.

Every table is computed from a ``CensusCorpus`` loaded out of the store.
Writers emit no wall-clock values, so identical corpora give identical bytes.
"""

import csv
import io
import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Optional, Sequence

from pypi_census.config import DEFAULT_UNIQUE_IMPORTERS, CensusSettings
from pypi_census.core.authors import AuthorTerms, author_type_shares
from pypi_census.core.classifiers import CLASSIFIER_REPORTS, parse_labels
from pypi_census.core.imports import ImportString
from pypi_census.core.licenses import GPL_FAMILY_VERSIONS, LicenseAssignment
from pypi_census.core.registry import PackageRecord
from pypi_census.core.stats import (
    FrequencyTable,
    ImportKey,
    ImportOccurrence,
    SizeBasis,
    YearlyActivity,
    cagr_between,
    distribution_summary,
    gini,
    import_frequency,
    imports_by_year,
    inter_release_gaps,
    per_author_series,
    size_series,
    summary_counts,
    top_share,
    unique_importing_packages_by_year,
    yearly_activity,
)
from pypi_census.errors import CensusError, StatisticError
from pypi_census.log import get_logger

log = get_logger("reports")

MANIFEST_FILE = "manifest.json"
FLOAT_DIGITS = 6

DISTRIBUTION_COLUMNS = ("series", "n", "mean", "std", "min", "p25", "p50", "p75", "max", "gini")
CAGR_MEASURES = ("new_packages", "active_packages", "new_releases", "new_authors", "imports")
CONCENTRATION_K = (1, 10, 100)


@dataclass(frozen=True)
class ReportTable:
    """A named table with fixed column order."""

    name: str
    title: str
    columns: tuple[str, ...]
    rows: tuple[tuple, ...]

    def records(self) -> list[dict[str, Any]]:
        return [dict(zip(self.columns, row)) for row in self.rows]


@dataclass(frozen=True)
class ReportOptions:
    cagr_start_year: Optional[int] = None
    cagr_end_year: Optional[int] = None
    cagr_inclusive: bool = True
    top_n: int = 20
    unique_importers: tuple[str, ...] = tuple(DEFAULT_UNIQUE_IMPORTERS)

    @classmethod
    def from_settings(cls, settings: CensusSettings) -> "ReportOptions":
        return cls(
            cagr_start_year=settings.cagr_start_year,
            cagr_end_year=settings.cagr_end_year,
            cagr_inclusive=settings.cagr_inclusive,
            top_n=settings.top_n,
            unique_importers=tuple(settings.unique_importers),
        )


@dataclass
class CensusCorpus:
    """Everything the report tables are computed from."""

    packages: list[PackageRecord]
    occurrences: list[ImportOccurrence] = field(default_factory=list)
    licenses: list[LicenseAssignment] = field(default_factory=list)
    terms: Optional[AuthorTerms] = None

    @property
    def live(self) -> list[PackageRecord]:
        return [p for p in self.packages if not p.gone]


def _frequency_table(name: str, title: str, table: FrequencyTable, key: str = "key") -> ReportTable:
    return ReportTable(
        name=name,
        title=title,
        columns=(key, "count", "proportion"),
        rows=tuple((row.key, row.count, row.proportion) for row in table.rows),
    )


def _distribution_row(series: str, values: Sequence[float]) -> tuple:
    if not values:
        return (series, 0) + (None,) * (len(DISTRIBUTION_COLUMNS) - 2)
    summary = distribution_summary(values)
    try:
        coefficient: Optional[float] = gini(values)
    except StatisticError:
        coefficient = None
    return (
        series,
        summary.n,
        summary.mean,
        summary.std,
        summary.min,
        summary.p25,
        summary.p50,
        summary.p75,
        summary.max,
        coefficient,
    )


def _distribution_table(name: str, title: str, series: Iterable[tuple[str, Sequence[float]]]) -> ReportTable:
    return ReportTable(
        name=name,
        title=title,
        columns=DISTRIBUTION_COLUMNS,
        rows=tuple(_distribution_row(label, list(values)) for label, values in series),
    )


# Activity and growth


def yearly_activity_report(activity: list[YearlyActivity]) -> ReportTable:
    return ReportTable(
        name="yearly_activity",
        title="New packages, active packages, new releases and new authors by year",
        columns=("year", "new_packages", "active_packages", "new_releases", "new_authors"),
        rows=tuple(
            (a.year, a.new_packages, a.active_packages, a.new_releases, a.new_authors)
            for a in activity
        ),
    )


def cagr_report(
    activity: list[YearlyActivity], imports_per_year: dict[int, int], options: ReportOptions
) -> ReportTable:
    """Growth of each yearly measure between the configured end years.

    Undefined rates (zero starting value) are reported with an empty rate.
    """
    columns = ("measure", "start_year", "end_year", "v_start", "v_end", "n_years", "rate")
    series = {measure: {a.year: getattr(a, measure) for a in activity} for measure in CAGR_MEASURES[:-1]}
    series["imports"] = dict(imports_per_year)

    years = [a.year for a in activity]
    start = options.cagr_start_year if options.cagr_start_year is not None else (min(years) if years else None)
    end = options.cagr_end_year if options.cagr_end_year is not None else (max(years) if years else None)

    rows = []
    if start is not None and end is not None and end > start:
        n_years = end - start + 1 if options.cagr_inclusive else end - start
        for measure in CAGR_MEASURES:
            values = series[measure]
            try:
                growth = cagr_between(values, start, end, measure=measure, inclusive=options.cagr_inclusive)
                rate: Optional[float] = growth.rate
            except StatisticError as e:
                log.debug("No growth rate for %s: %s", measure, e)
                rate = None
            rows.append((measure, start, end, values.get(start, 0), values.get(end, 0), n_years, rate))
    return ReportTable("cagr", "Compound annual growth rate", columns, tuple(rows))


# Distributions


def releases_per_package_report(corpus: CensusCorpus) -> ReportTable:
    counts = [len(p.releases) for p in corpus.live]
    return _distribution_table(
        "releases_per_package",
        "Distribution of releases per package",
        [("releases_per_package", counts)],
    )


def release_concentration_report(corpus: CensusCorpus) -> ReportTable:
    counts = [len(p.releases) for p in corpus.live]
    rows = []
    if sum(counts) > 0:
        for k in CONCENTRATION_K:
            rows.append((k, min(k, len(counts)), top_share(counts, k)))
    return ReportTable(
        "release_concentration",
        "Share of all releases held by the top-k packages",
        ("k", "packages", "share"),
        tuple(rows),
    )


def per_author_report(corpus: CensusCorpus) -> ReportTable:
    series = per_author_series(corpus.live)
    return _distribution_table(
        "per_author",
        "Distribution of packages and releases per author",
        [
            ("packages_per_author", list(series.packages.values())),
            ("releases_per_author", list(series.releases.values())),
        ],
    )


def sizes_report(corpus: CensusCorpus) -> ReportTable:
    return _distribution_table(
        "sizes",
        "Distribution of size (KiB) by release and package",
        [
            ("size_per_release_kib", size_series(corpus.live, SizeBasis.RELEASE)),
            ("size_per_package_kib", size_series(corpus.live, SizeBasis.PACKAGE)),
        ],
    )


def inter_release_report(corpus: CensusCorpus) -> ReportTable:
    return _distribution_table(
        "inter_release_gaps",
        "Distribution of days between releases",
        [("days_between_releases", inter_release_gaps(corpus.live))],
    )


def author_types_report(corpus: CensusCorpus) -> ReportTable:
    shares = author_type_shares((p.author for p in corpus.live), corpus.terms)
    return ReportTable(
        "author_types",
        "Author type shares by author string and by package",
        ("type", "author_strings", "packages"),
        tuple((s.label, s.author_strings, s.packages) for s in shares),
    )


def summary_report(corpus: CensusCorpus) -> ReportTable:
    counts = summary_counts(corpus.packages, imports=len(corpus.occurrences))
    return ReportTable(
        "summary",
        "Corpus totals",
        ("measure", "value"),
        tuple(
            (measure, getattr(counts, measure))
            for measure in ("packages", "releases", "classifications", "authors", "maintainers", "licenses", "imports")
        ),
    )


# Licenses


def license_families_report(licenses: Iterable[LicenseAssignment]) -> ReportTable:
    counts = Counter(a.family.value for a in licenses)
    return _frequency_table(
        "license_families", "Packages by license family", FrequencyTable.from_counts(counts), key="family"
    )


def gpl_versions_report(licenses: Iterable[LicenseAssignment]) -> ReportTable:
    counts = Counter(
        f"{a.family.value} {a.version}" for a in licenses if a.family.value in GPL_FAMILY_VERSIONS
    )
    return _frequency_table(
        "gpl_versions", "GPL-family packages by version", FrequencyTable.from_counts(counts), key="license"
    )


# Classifiers


def classifier_reports(corpus: CensusCorpus) -> list[ReportTable]:
    labels = [label for p in corpus.live for label in parse_labels(p.classifiers)]
    return [
        _frequency_table(f"classifiers_{report.name}", report.title, report.compute(labels), key="value")
        for report in CLASSIFIER_REPORTS
    ]


# Imports


def imports_by_year_report(per_year: dict[int, int]) -> ReportTable:
    return ReportTable(
        "imports_by_year",
        "Import statements by year of release",
        ("year", "imports"),
        tuple(per_year.items()),
    )


def import_frequency_reports(corpus: CensusCorpus, top_n: int) -> list[ReportTable]:
    strings = [ImportString(o.value) for o in corpus.occurrences]
    return [
        _frequency_table(
            "import_frequency_top_level",
            "Imports by top-level package",
            import_frequency(strings, ImportKey.TOP_LEVEL).top(top_n),
            key="top_level",
        ),
        _frequency_table(
            "import_frequency_full_path",
            "Imports by import string",
            import_frequency(strings, ImportKey.FULL_PATH).top(top_n),
            key="import_string",
        ),
    ]


def unique_importers_report(corpus: CensusCorpus, top_levels: Sequence[str]) -> ReportTable:
    rows = []
    for top_level in top_levels:
        for year, count in unique_importing_packages_by_year(corpus.occurrences, top_level).items():
            rows.append((top_level, year, count))
    return ReportTable(
        "unique_importers",
        "Unique importing packages by year and top-level import",
        ("top_level", "year", "packages"),
        tuple(rows),
    )


def build_reports(corpus: CensusCorpus, options: Optional[ReportOptions] = None) -> list[ReportTable]:
    """Compute every report table, in a fixed order."""
    options = options or ReportOptions()
    activity = yearly_activity(corpus.packages)
    per_year = imports_by_year(corpus.occurrences)

    builders: list[Callable[[], Any]] = [
        lambda: summary_report(corpus),
        lambda: yearly_activity_report(activity),
        lambda: cagr_report(activity, per_year, options),
        lambda: releases_per_package_report(corpus),
        lambda: release_concentration_report(corpus),
        lambda: inter_release_report(corpus),
        lambda: per_author_report(corpus),
        lambda: author_types_report(corpus),
        lambda: sizes_report(corpus),
        lambda: license_families_report(corpus.licenses),
        lambda: gpl_versions_report(corpus.licenses),
        lambda: classifier_reports(corpus),
        lambda: imports_by_year_report(per_year),
        lambda: import_frequency_reports(corpus, options.top_n),
        lambda: unique_importers_report(corpus, options.unique_importers),
    ]

    tables: list[ReportTable] = []
    for build in builders:
        result = build()
        tables.extend(result if isinstance(result, list) else [result])
    return tables


# Writers


def _cell(value: Any) -> Any:
    if isinstance(value, float):
        return round(value, FLOAT_DIGITS)
    return value


def _csv_cell(value: Any) -> str:
    value = _cell(value)
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def render_csv(table: ReportTable) -> str:
    """RFC 4180 text: CRLF line ends, minimal quoting."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\r\n", quoting=csv.QUOTE_MINIMAL)
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_csv_cell(value) for value in row])
    return buffer.getvalue()


def render_json(table: ReportTable) -> str:
    """Array of row objects with keys in column order."""
    records = [{key: _cell(value) for key, value in record.items()} for record in table.records()]
    return json.dumps(records, indent=2, ensure_ascii=False) + "\n"


RENDERERS = {"csv": render_csv, "json": render_json}


def write_reports(
    tables: Sequence[ReportTable],
    out_dir: Path,
    fmt: str = "csv",
    metadata: Optional[dict[str, str]] = None,
) -> Path:
    """Write one file per table plus ``manifest.json``; returns the manifest path."""
    if fmt not in RENDERERS:
        raise CensusError(f"unknown report format {fmt!r}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    entries = []
    for table in tables:
        filename = f"{table.name}.{fmt}"
        # newline="" keeps the CRLF terminators as written.
        with open(out_dir / filename, "w", encoding="utf-8", newline="") as f:
            f.write(RENDERERS[fmt](table))
        entries.append({"name": table.name, "title": table.title, "file": filename, "rows": len(table.rows)})

    manifest = {
        "metadata": dict(sorted((metadata or {}).items())),
        "format": fmt,
        "reports": entries,
    }
    path = out_dir / MANIFEST_FILE
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(json.dumps(manifest, indent=2, ensure_ascii=False) + "\n")
    log.info("Wrote %d reports to %s", len(entries), out_dir)
    return path


def read_manifest(out_dir: Path) -> dict:
    path = Path(out_dir) / MANIFEST_FILE
    if not path.is_file():
        raise CensusError(f"no reports in {out_dir} (missing {MANIFEST_FILE}); run the stats stage first")
    return json.loads(path.read_text(encoding="utf-8"))


def read_report(out_dir: Path, name: str) -> tuple[dict, list[str], list[list[str]]]:
    """Load a written report as ``(manifest entry, columns, rows)`` of strings.

    Raises:
        CensusError: If there is no manifest or no report with that name.
    """
    manifest = read_manifest(out_dir)
    entry = next((e for e in manifest["reports"] if e["name"] == name), None)
    if entry is None:
        known = ", ".join(e["name"] for e in manifest["reports"])
        raise CensusError(f"no report named {name!r}; available: {known}")

    path = Path(out_dir) / entry["file"]
    if manifest.get("format") == "json":
        records = json.loads(path.read_text(encoding="utf-8"))
        columns = list(records[0]) if records else []
        rows = [["" if r[c] is None else str(r[c]) for c in columns] for r in records]
        return entry, columns, rows

    with open(path, encoding="utf-8", newline="") as f:
        reader = list(csv.reader(f))
    return entry, reader[0] if reader else [], reader[1:]
