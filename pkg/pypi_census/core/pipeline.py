"""Stage orchestration: index, metadata, sdists, scan, licenses, stats.

Workers fetch and scan in parallel; their results are collected and written
by the calling thread in a fixed order, so the store and the reports do not
depend on ``jobs`` or on completion order.
"""

import hashlib
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Literal, Optional, Sequence, TypeVar

from pydantic import BaseModel, ConfigDict, PositiveInt, field_validator
from rich.progress import BarColumn, MofNCompleteColumn, Progress, TextColumn

from pypi_census import __version__
from pypi_census.config import CensusSettings
from pypi_census.core.archive import SdistArchive, detect_format
from pypi_census.core.authors import AuthorTerms, classify_author
from pypi_census.core.imports import FileExtraction, extract_file_imports, grammar_version
from pypi_census.core.licenses import (
    LicenseAssignment,
    LicenseFamily,
    LicenseRuleSet,
    LicenseSource,
    resolve_package_license,
)
from pypi_census.core.registry import (
    DistFile,
    PackageRecord,
    RegistryClient,
    RegistrySource,
    normalize_package_name,
)
from pypi_census.core.reports import CensusCorpus, ReportOptions, build_reports, write_reports
from pypi_census.core.stats import ImportOccurrence
from pypi_census.db.database import SCHEMA_VERSION
from pypi_census.db.repository import CensusStore, PendingScan
from pypi_census.errors import CensusError, InvalidNameError, UsageError
from pypi_census.log import get_logger, stderr_console

log = get_logger("pipeline")

T = TypeVar("T")
R = TypeVar("R")

# Failures of a single item; anything else aborts the run.
ITEM_ERRORS = (CensusError, ValueError, OSError)


class Stage(str, Enum):
    INDEX = "index"
    METADATA = "metadata"
    SDISTS = "sdists"
    SCAN = "scan"
    LICENSES = "licenses"
    STATS = "stats"


STAGE_ORDER: tuple[Stage, ...] = tuple(Stage)


def parse_stages(value: str) -> list[Stage]:
    """Parse a comma-separated stage list such as ``"index,metadata"``.

    Raises:
        UsageError: On an unknown stage name.
    """
    stages = []
    for part in value.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            stages.append(Stage(part))
        except ValueError:
            known = ", ".join(s.value for s in STAGE_ORDER)
            raise UsageError(f"unknown stage {part!r}; expected some of {known}") from None
    return stages


class RunConfig(BaseModel):
    """One pipeline invocation."""

    model_config = ConfigDict(frozen=True)

    source: RegistrySource
    store_path: Path
    stages: list[Stage] = list(STAGE_ORDER)
    limit: Optional[PositiveInt] = None
    output: Literal["csv", "json"] = "csv"
    out_dir: Path = Path("reports")
    jobs: PositiveInt = 8
    rescan: bool = False

    @field_validator("stages")
    @classmethod
    def _check_order(cls, stages: list[Stage]) -> list[Stage]:
        if not stages:
            raise ValueError("at least one stage is required")
        if len(set(stages)) != len(stages):
            raise ValueError("stages must not repeat")
        positions = [STAGE_ORDER.index(s) for s in stages]
        if positions != sorted(positions):
            order = ",".join(s.value for s in STAGE_ORDER)
            raise ValueError(f"stages must follow pipeline order {order}")
        return stages

    @classmethod
    def from_settings(
        cls, settings: CensusSettings, stages: Optional[Sequence[Stage]] = None, **overrides
    ) -> "RunConfig":
        """Build a config, mapping validation failures to ``UsageError``."""
        try:
            return cls(
                source=RegistrySource.from_settings(settings),
                store_path=settings.store_path,
                stages=list(stages) if stages is not None else list(STAGE_ORDER),
                output=settings.output_format,
                out_dir=settings.output_dir,
                jobs=settings.jobs,
                **{k: v for k, v in overrides.items() if v is not None},
            )
        except ValueError as e:
            raise UsageError(str(e)) from e


@dataclass
class StageResult:
    stage: Stage
    processed: int = 0
    failed: int = 0
    outputs: list[Path] = field(default_factory=list)

    @property
    def failure_ratio(self) -> float:
        return self.failed / self.processed if self.processed else 0.0


@dataclass
class RunResult:
    stages: list[StageResult] = field(default_factory=list)

    def exit_code(self, threshold: float) -> int:
        """0, or 1 when any stage lost more than ``threshold`` of its items."""
        return 1 if any(s.failure_ratio > threshold for s in self.stages) else 0


@dataclass(frozen=True)
class ScanOutcome:
    """Result of scanning one release, produced on a worker thread."""

    pending: PendingScan
    archive: Optional[str] = None
    extractions: tuple[FileExtraction, ...] = ()
    error: Optional[str] = None


def corpus_id_for(packages: Sequence[PackageRecord]) -> str:
    """Stable identifier derived from package names and versions."""
    digest = hashlib.sha256()
    for pkg in sorted(packages, key=lambda p: p.name):
        for release in sorted(pkg.releases, key=lambda r: r.version):
            digest.update(f"{pkg.name}=={release.version}\n".encode())
    return digest.hexdigest()[:16]


def choose_sdist(sdists: Sequence[DistFile]) -> Optional[DistFile]:
    """First sdist, by file name, in a supported archive format."""
    for candidate in sorted(sdists, key=lambda f: f.filename):
        if detect_format(candidate.filename) is not None:
            return candidate
    return None


class CensusPipeline:
    """Runs stages against one registry source and one store.

    Example:
        with CensusPipeline(config, settings) as pipeline:
            result = pipeline.run()
    """

    def __init__(
        self,
        config: RunConfig,
        settings: Optional[CensusSettings] = None,
        client: Optional[RegistryClient] = None,
        store: Optional[CensusStore] = None,
    ):
        self.config = config
        self.settings = settings or CensusSettings()
        self.client = client or RegistryClient(
            config.source,
            retries=self.settings.retries,
            backoff_base=self.settings.backoff_base,
            timeout=self.settings.request_timeout,
        )
        self.store = store or CensusStore(config.store_path)

    def __enter__(self) -> "CensusPipeline":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def close(self) -> None:
        self.client.close()
        self.store.close()

    # Helpers

    def _parallel(self, label: str, items: Sequence[T], work: Callable[[T], R]) -> list[R | Exception]:
        """Run ``work`` over ``items`` on the worker pool; results keep input order."""
        results: list[R | Exception] = [None] * len(items)  # type: ignore[list-item]
        if not items:
            return results
        with Progress(
            TextColumn("[progress.description]{task.description}"),
            BarColumn(),
            MofNCompleteColumn(),
            console=stderr_console,
            transient=True,
        ) as progress:
            task = progress.add_task(label, total=len(items))
            with ThreadPoolExecutor(max_workers=self.config.jobs) as pool:
                futures = {pool.submit(work, item): i for i, item in enumerate(items)}
                for future in as_completed(futures):
                    try:
                        results[futures[future]] = future.result()
                    except ITEM_ERRORS as e:
                        results[futures[future]] = e
                    progress.advance(task)
        return results

    def _selected_names(self) -> Optional[set[str]]:
        """Package names within ``limit``, or None for all."""
        if self.config.limit is None:
            return None
        names = self.store.index_names() or self.store.package_names()
        return set(names[: self.config.limit])

    # Stages

    def fetch_index(self) -> StageResult:
        result = StageResult(Stage.INDEX)
        raw_names = self.client.fetch_package_index()
        entries: list[tuple[str, Optional[str]]] = []
        for raw in raw_names:
            result.processed += 1
            try:
                entries.append((raw, normalize_package_name(raw)))
            except InvalidNameError as e:
                log.warning("Skipping index entry: %s", e)
                entries.append((raw, None))
                result.failed += 1
        self.store.replace_index(entries)
        log.info("Index lists %d projects", len(entries))
        return result

    def fetch_metadata(self, terms: Optional[AuthorTerms] = None) -> StageResult:
        result = StageResult(Stage.METADATA)
        names = self.store.index_names()
        if not names:
            raise UsageError("no index in the store; run fetch-index first")
        if self.config.limit is not None:
            names = names[: self.config.limit]
        terms = terms or AuthorTerms.load(self.settings.author_terms_path)

        outcomes = self._parallel("Fetching metadata", names, self.client.fetch_package_metadata)
        for name, outcome in sorted(zip(names, outcomes), key=lambda pair: pair[0]):
            result.processed += 1
            if isinstance(outcome, Exception):
                log.warning("Skipping %s: %s", name, outcome)
                result.failed += 1
                continue
            self.store.upsert_package(outcome)
            if not outcome.gone:
                record = classify_author(outcome.author, terms) if outcome.author else None
                self.store.set_author_flag(outcome.name, record)
        log.info("Stored metadata for %d packages (%d failed)", result.processed - result.failed, result.failed)
        return result

    def _pending(self) -> list[PendingScan]:
        pending = self.store.pending_scans(rescan=self.config.rescan)
        selected = self._selected_names()
        if selected is not None:
            pending = [p for p in pending if p.package in selected]
        return pending

    def fetch_sdists(self) -> StageResult:
        result = StageResult(Stage.SDISTS)
        targets = [(p, choose_sdist(p.sdists)) for p in self._pending()]
        targets = [(p, f) for p, f in targets if f is not None]
        outcomes = self._parallel("Downloading sdists", targets, lambda t: self.client.fetch_sdist(t[1]))
        for (pending, file), outcome in zip(targets, outcomes):
            result.processed += 1
            if isinstance(outcome, Exception):
                log.warning("Skipping %s %s: %s", pending.package, pending.version, outcome)
                result.failed += 1
        log.info("Cached %d sdists (%d failed)", result.processed - result.failed, result.failed)
        return result

    def _scan_one(self, pending: PendingScan) -> ScanOutcome:
        file = choose_sdist(pending.sdists)
        if file is None:
            names = ", ".join(f.filename for f in pending.sdists)
            return ScanOutcome(pending, error=f"no supported archive format among {names}")
        try:
            path = self.client.fetch_sdist(file)
            archive = SdistArchive(
                path,
                cap_bytes=self.settings.archive_cap_bytes,
                max_entry_bytes=self.settings.max_entry_bytes,
                package=pending.package,
                release=pending.version,
            )
            extractions = tuple(
                extract_file_imports(entry.path, text) for entry, text in archive.iter_python_sources()
            )
        except ITEM_ERRORS as e:
            return ScanOutcome(pending, archive=file.filename, error=str(e))
        return ScanOutcome(pending, archive=file.filename, extractions=extractions)

    def scan_imports(self) -> StageResult:
        result = StageResult(Stage.SCAN)
        pending = self._pending()
        outcomes = self._parallel("Scanning imports", pending, self._scan_one)
        for outcome in outcomes:
            result.processed += 1
            if outcome.error is not None:
                log.warning("Scan failed for %s %s: %s", outcome.pending.package, outcome.pending.version, outcome.error)
                self.store.record_scan_failure(outcome.pending.release_id, outcome.error, outcome.archive)
                result.failed += 1
                continue
            self.store.record_imports(outcome.pending.release_id, outcome.extractions, archive=outcome.archive)
        log.info("Scanned %d releases (%d failed)", result.processed - result.failed, result.failed)
        return result

    def resolve_licenses(self, rules: Optional[LicenseRuleSet] = None) -> StageResult:
        result = StageResult(Stage.LICENSES)
        rules = rules or LicenseRuleSet.load(self.settings.rules_path)
        packages = self.store.load_packages()
        selected = self._selected_names()
        if selected is not None:
            packages = [p for p in packages if p.name in selected]

        outcomes = self._parallel(
            "Resolving licenses",
            packages,
            lambda pkg: resolve_package_license(pkg, rules, fetch_file=self.client.fetch_license_file),
        )
        for pkg, outcome in zip(packages, outcomes):
            result.processed += 1
            if isinstance(outcome, Exception):
                log.warning("License resolution failed for %s: %s", pkg.name, outcome)
                result.failed += 1
                continue
            self.store.set_license(pkg.name, outcome, rules.version)
        log.info("Resolved licenses for %d packages (rules %s)", result.processed - result.failed, rules.version)
        return result

    def load_corpus(self, terms: Optional[AuthorTerms] = None) -> CensusCorpus:
        packages = self.store.load_packages()
        selected = self._selected_names()
        if selected is not None:
            packages = [p for p in packages if p.name in selected]
        names = {p.name for p in packages}

        occurrences = [
            ImportOccurrence(row["package"], row["year"], row["module"])
            for row in self.store.query("imports_with_year")
            if row["package"] in names
        ]
        licenses = [
            LicenseAssignment(
                family=LicenseFamily(row["family"]),
                name=row["name"],
                version=row["version"],
                source=LicenseSource(row["source"]),
                ambiguous=row["ambiguous"],
            )
            for row in self.store.query("license_assignments")
            if row["package"] in names
        ]
        return CensusCorpus(packages=packages, occurrences=occurrences, licenses=licenses, terms=terms)

    def compute_stats(self) -> StageResult:
        """Write every report table and record a corpus snapshot.

        Raises:
            UsageError: If no release has been scanned yet.
        """
        result = StageResult(Stage.STATS)
        if not self.store.scan_summary():
            raise UsageError("stats requires scanned imports; run scan-imports first")

        terms = AuthorTerms.load(self.settings.author_terms_path)
        rules = LicenseRuleSet.load(self.settings.rules_path)
        corpus = self.load_corpus(terms)
        if not corpus.licenses:
            log.warning("No license assignments stored; license tables will be empty")

        corpus_id = self.settings.corpus_id or corpus_id_for(corpus.live)
        metadata = {
            "corpus_id": corpus_id,
            "grammar_version": grammar_version(),
            "rule_set_version": rules.version,
            "author_terms_version": terms.version,
            "schema_version": SCHEMA_VERSION,
            "tool_version": __version__,
        }
        tables = build_reports(corpus, ReportOptions.from_settings(self.settings))
        manifest = write_reports(tables, self.config.out_dir, self.config.output, metadata)
        self.store.snapshot(corpus_id, {k: v for k, v in metadata.items() if k != "corpus_id"})

        result.processed = len(tables)
        result.outputs = [self.config.out_dir / f"{t.name}.{self.config.output}" for t in tables] + [manifest]
        return result

    def run_stage(self, stage: Stage) -> StageResult:
        runners: dict[Stage, Callable[[], StageResult]] = {
            Stage.INDEX: self.fetch_index,
            Stage.METADATA: self.fetch_metadata,
            Stage.SDISTS: self.fetch_sdists,
            Stage.SCAN: self.scan_imports,
            Stage.LICENSES: self.resolve_licenses,
            Stage.STATS: self.compute_stats,
        }
        log.info("Stage %s", stage.value)
        return runners[stage]()

    def run(self) -> RunResult:
        """Run the configured stages in order."""
        result = RunResult()
        for stage in self.config.stages:
            result.stages.append(self.run_stage(stage))
        return result


def run(config: RunConfig, settings: Optional[CensusSettings] = None) -> RunResult:
    with CensusPipeline(config, settings) as pipeline:
        return pipeline.run()
