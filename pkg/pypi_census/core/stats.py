"""Ecosystem statistics: yearly activity, growth, distributions, frequencies.

Everything here is a pure function of ``PackageRecord`` values and import
occurrences. Years are UTC calendar years.
"""

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from pypi_census.core.authors import normalize_author_key
from pypi_census.core.imports import ImportString, top_level_of
from pypi_census.core.registry import PackageRecord
from pypi_census.errors import EmptySeriesError, StatisticError, UndefinedGiniError, UndefinedRateError

SECONDS_PER_DAY = 86400.0
KIB = 1024.0


# Yearly activity


@dataclass(frozen=True)
class YearlyActivity:
    year: int
    new_packages: int
    active_packages: int
    new_releases: int
    new_authors: int

    def __post_init__(self):
        if min(self.new_packages, self.active_packages, self.new_releases, self.new_authors) < 0:
            raise ValueError("activity counts must be nonnegative")
        if self.new_packages > self.active_packages:
            raise ValueError(f"{self.year}: more new packages than active packages")


@dataclass
class ActivityAccumulator:
    """Order-independent fold of yearly activity.

    Shards built from disjoint or overlapping package sets merge into the
    same result regardless of merge order.
    """

    active_years: dict[str, set[int]] = field(default_factory=dict)
    release_years: dict[tuple[str, str], int] = field(default_factory=dict)
    author_first_year: dict[str, int] = field(default_factory=dict)

    def add(self, pkg: PackageRecord) -> "ActivityAccumulator":
        if pkg.gone:
            return self
        years = set()
        for release in pkg.releases:
            upload = release.upload_time
            if upload is None:
                continue
            years.add(upload.year)
            self.release_years[(pkg.name, release.version)] = upload.year
        if not years:
            return self
        self.active_years.setdefault(pkg.name, set()).update(years)
        if pkg.author and pkg.author.strip():
            self._note_author(normalize_author_key(pkg.author), min(years))
        return self

    def _note_author(self, key: str, year: int) -> None:
        current = self.author_first_year.get(key)
        if current is None or year < current:
            self.author_first_year[key] = year

    def merge(self, other: "ActivityAccumulator") -> "ActivityAccumulator":
        merged = ActivityAccumulator(
            active_years={name: set(years) for name, years in self.active_years.items()},
            release_years=dict(self.release_years),
            author_first_year=dict(self.author_first_year),
        )
        for name, years in other.active_years.items():
            merged.active_years.setdefault(name, set()).update(years)
        for key, year in other.release_years.items():
            existing = merged.release_years.get(key)
            merged.release_years[key] = year if existing is None else min(existing, year)
        for key, year in other.author_first_year.items():
            merged._note_author(key, year)
        return merged

    def result(self) -> list[YearlyActivity]:
        if not self.active_years:
            return []
        new_packages = Counter(min(years) for years in self.active_years.values())
        active = Counter(year for years in self.active_years.values() for year in years)
        releases = Counter(self.release_years.values())
        authors = Counter(self.author_first_year.values())
        first, last = min(active), max(active)
        return [
            YearlyActivity(
                year=year,
                new_packages=new_packages[year],
                active_packages=active[year],
                new_releases=releases[year],
                new_authors=authors[year],
            )
            for year in range(first, last + 1)
        ]


def yearly_activity(packages: Iterable[PackageRecord]) -> list[YearlyActivity]:
    """One row per year from the first to the last observed upload."""
    accumulator = ActivityAccumulator()
    for pkg in packages:
        accumulator.add(pkg)
    return accumulator.result()


# Growth


@dataclass(frozen=True)
class GrowthRate:
    measure: str
    v_start: float
    v_end: float
    n_years: int
    rate: float


def cagr(v_start: float, v_end: float, n_years: int) -> float:
    """Compound annual growth rate ``(v_end / v_start) ** (1 / n_years) - 1``."""
    if v_start <= 0:
        raise UndefinedRateError("growth rate is undefined for a starting value of zero")
    if v_end < 0:
        raise StatisticError("ending value must be nonnegative")
    if n_years <= 0:
        raise StatisticError("n_years must be positive")
    return (v_end / v_start) ** (1.0 / n_years) - 1.0


def cagr_between(
    series: Mapping[int, float],
    start: int,
    end: int,
    measure: str = "",
    inclusive: bool = True,
) -> GrowthRate:
    """Growth between two years of a yearly series.

    With ``inclusive`` the exponent counts both end years (2006 through 2018
    is 13); otherwise it counts intervals (12).
    """
    if end <= start:
        raise StatisticError("end year must follow start year")
    n_years = end - start + 1 if inclusive else end - start
    v_start = series.get(start, 0)
    v_end = series.get(end, 0)
    return GrowthRate(measure, v_start, v_end, n_years, cagr(v_start, v_end, n_years))


# Distributions


def _as_array(values: Iterable[float]) -> np.ndarray:
    array = np.asarray(list(values), dtype=float)
    if array.size == 0:
        raise EmptySeriesError("series is empty")
    return array


def gini(values: Iterable[float]) -> float:
    """Gini coefficient via the sorted-rank form of the mean absolute difference."""
    array = np.sort(_as_array(values))
    if (array < 0).any():
        raise StatisticError("Gini coefficient requires nonnegative values")
    total = array.sum()
    if total <= 0:
        raise UndefinedGiniError("Gini coefficient is undefined for an all-zero series")
    n = array.size
    ranks = np.arange(1, n + 1)
    return float(2.0 * (ranks * array).sum() / (n * total) - (n + 1.0) / n)


@dataclass(frozen=True)
class DistributionSummary:
    n: int
    mean: float
    std: float
    min: float
    p25: float
    p50: float
    p75: float
    max: float

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "mean": self.mean,
            "std": self.std,
            "min": self.min,
            "p25": self.p25,
            "p50": self.p50,
            "p75": self.p75,
            "max": self.max,
        }


def distribution_summary(values: Iterable[float]) -> DistributionSummary:
    """Mean, sample standard deviation and linear-interpolated quartiles."""
    array = _as_array(values)
    p25, p50, p75 = np.percentile(array, [25, 50, 75], method="linear")
    std = float(array.std(ddof=1)) if array.size > 1 else 0.0
    return DistributionSummary(
        n=int(array.size),
        mean=float(array.mean()),
        std=std,
        min=float(array.min()),
        p25=float(p25),
        p50=float(p50),
        p75=float(p75),
        max=float(array.max()),
    )


def top_share(values: Iterable[float], k: int) -> float:
    """Share of the total held by the ``k`` largest values."""
    array = np.sort(_as_array(values))[::-1]
    total = array.sum()
    if total <= 0:
        raise StatisticError("share is undefined for a zero total")
    return float(array[:k].sum() / total)


def inter_release_gaps(packages: Iterable[PackageRecord]) -> list[float]:
    """Days between consecutive releases, pooled over packages."""
    gaps = []
    for pkg in packages:
        if pkg.gone:
            continue
        times = sorted(r.upload_time for r in pkg.releases if r.upload_time is not None)
        for earlier, later in zip(times, times[1:]):
            gaps.append((later - earlier).total_seconds() / SECONDS_PER_DAY)
    return gaps


class SizeBasis(Enum):
    RELEASE = "release"
    PACKAGE = "package"


def size_series(packages: Iterable[PackageRecord], by: SizeBasis = SizeBasis.RELEASE) -> list[float]:
    """Sizes in KiB over all distribution files, per release or per package."""
    sizes = []
    for pkg in packages:
        if pkg.gone:
            continue
        if by is SizeBasis.RELEASE:
            sizes.extend(release.size_bytes / KIB for release in pkg.releases)
        else:
            sizes.append(sum(release.size_bytes for release in pkg.releases) / KIB)
    return sizes


@dataclass(frozen=True)
class AuthorSeries:
    """Per-author package and release counts keyed by normalized author."""

    packages: dict[str, int]
    releases: dict[str, int]


def per_author_series(packages: Iterable[PackageRecord]) -> AuthorSeries:
    package_counts: dict[str, int] = defaultdict(int)
    release_counts: dict[str, int] = defaultdict(int)
    for pkg in packages:
        if pkg.gone or not pkg.author or not pkg.author.strip():
            continue
        key = normalize_author_key(pkg.author)
        package_counts[key] += 1
        release_counts[key] += len(pkg.releases)
    return AuthorSeries(
        packages=dict(sorted(package_counts.items())),
        releases=dict(sorted(release_counts.items())),
    )


@dataclass(frozen=True)
class SummaryCounts:
    packages: int
    releases: int
    classifications: int
    authors: int
    maintainers: int
    licenses: int
    imports: int


def summary_counts(packages: Sequence[PackageRecord], imports: int = 0) -> SummaryCounts:
    """Corpus totals.

    Classifications count every assigned label; authors, maintainers and raw
    license values count distinct strings.
    """
    live = [p for p in packages if not p.gone]

    def distinct(values: Iterable[Optional[str]]) -> int:
        return len({normalize_author_key(v) for v in values if v and v.strip()})

    return SummaryCounts(
        packages=len(live),
        releases=sum(len(p.releases) for p in live),
        classifications=sum(len(p.classifiers) for p in live),
        authors=distinct(p.author for p in live),
        maintainers=distinct(p.maintainer for p in live),
        licenses=len({p.license_field.strip() for p in live if p.license_field and p.license_field.strip()}),
        imports=imports,
    )


# Frequency tables


@dataclass(frozen=True)
class FrequencyRow:
    key: str
    count: int
    proportion: float


@dataclass(frozen=True)
class FrequencyTable:
    """Rows sorted by count descending, then key ascending."""

    rows: tuple[FrequencyRow, ...]
    total: int

    @classmethod
    def from_counts(cls, counts: Mapping[str, int], total: Optional[int] = None) -> "FrequencyTable":
        total = sum(counts.values()) if total is None else total
        ordered = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
        rows = tuple(
            FrequencyRow(key, count, count / total if total else 0.0) for key, count in ordered
        )
        return cls(rows=rows, total=total)

    def top(self, k: int) -> "FrequencyTable":
        """First ``k`` rows; counts, proportions and total are unchanged."""
        return FrequencyTable(rows=self.rows[:k], total=self.total)

    def __len__(self) -> int:
        return len(self.rows)

    def as_dict(self) -> dict[str, int]:
        return {row.key: row.count for row in self.rows}


class ImportKey(Enum):
    TOP_LEVEL = "top_level"
    FULL_PATH = "full_path"


def import_frequency(imports: Iterable[ImportString], key: ImportKey = ImportKey.FULL_PATH) -> FrequencyTable:
    """Counts over every occurrence, keyed by full path or top-level package."""
    if key is ImportKey.TOP_LEVEL:
        counts = Counter(imp.top_level for imp in imports)
    else:
        counts = Counter(imp.value for imp in imports)
    return FrequencyTable.from_counts(counts)


@dataclass(frozen=True)
class ImportOccurrence:
    """One import string seen in a release of a package."""

    package: str
    year: Optional[int]
    value: str

    @property
    def top_level(self) -> str:
        return top_level_of(self.value)


def imports_by_year(occurrences: Iterable[ImportOccurrence]) -> dict[int, int]:
    counts = Counter(o.year for o in occurrences if o.year is not None)
    return dict(sorted(counts.items()))


def unique_importing_packages_by_year(
    occurrences: Iterable[ImportOccurrence], top_level: str
) -> dict[int, int]:
    """Distinct importing packages per release year for one top-level import."""
    importers: dict[int, set[str]] = defaultdict(set)
    for occurrence in occurrences:
        if occurrence.year is None or occurrence.top_level != top_level:
            continue
        importers[occurrence.year].add(occurrence.package)
    return {year: len(names) for year, names in sorted(importers.items())}
