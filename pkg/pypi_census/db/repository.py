"""Repository pattern for data access, and the ``CensusStore`` facade.

Writes go through ``CensusStore`` and are serialized by one lock; each
write is a single transaction, so a failure leaves no partial rows.
Readers open their own sessions and see committed data only.
"""

import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Iterable, Iterator, Optional, Sequence, Union

from sqlalchemy import delete, func, select
from sqlalchemy.exc import SQLAlchemyError
from sqlalchemy.orm import Session

from pypi_census.core.authors import AuthorRecord
from pypi_census.core.imports import FileExtraction, ImportStatement
from pypi_census.core.licenses import LicenseAssignment
from pypi_census.core.registry import DistFile, PackageRecord, PackageType, ReleaseRecord
from pypi_census.db.database import get_session, get_session_factory, init_database
from pypi_census.db.models import (
    AuthorFlag,
    Base,
    ImportRow,
    IndexEntry,
    LicenseRow,
    Package,
    Release,
    ReleaseFile,
    ScanStatus,
    Snapshot,
)
from pypi_census.errors import CatalogError, ForeignKeyError, StoreError
from pypi_census.log import get_logger

log = get_logger("store")

SCANNED = "scanned"
FAILED = "failed"


def to_naive_utc(value: Optional[datetime]) -> Optional[datetime]:
    if value is None:
        return None
    if value.tzinfo is not None:
        value = value.astimezone(timezone.utc).replace(tzinfo=None)
    return value


def to_aware_utc(value: Optional[datetime]) -> Optional[datetime]:
    return value.replace(tzinfo=timezone.utc) if value is not None else None


def _file_signature(files: Iterable[Any]) -> tuple:
    """Comparable identity of a release's files, for ORM rows or records."""
    signature = []
    for f in files:
        package_type = f.package_type.value if isinstance(f.package_type, PackageType) else f.package_type
        signature.append(
            (f.filename, package_type, f.size_bytes, to_naive_utc(f.upload_time), f.url, f.sha256)
        )
    return tuple(sorted(signature, key=lambda item: item[0]))


class PackageRepository:
    """Package and release rows."""

    def __init__(self, session: Session):
        self.session = session

    def get_by_name(self, name: str) -> Optional[Package]:
        return self.session.execute(select(Package).where(Package.name == name)).scalar_one_or_none()

    def list_all(self) -> list[Package]:
        return list(self.session.execute(select(Package).order_by(Package.name)).scalars())

    def upsert(self, pkg: PackageRecord) -> Package:
        """Insert or update a package by canonical name.

        Releases whose files are unchanged keep their import rows and scan
        status. Changed releases lose them so they are scanned again;
        releases no longer listed are deleted.
        """
        row = self.get_by_name(pkg.name)
        if row is None:
            row = Package(name=pkg.name, raw_name=pkg.raw_name, classifiers=[])
            self.session.add(row)

        row.raw_name = pkg.raw_name
        row.gone = pkg.gone
        if not pkg.gone:
            row.author = pkg.author
            row.maintainer = pkg.maintainer
            row.author_email = pkg.author_email
            row.maintainer_email = pkg.maintainer_email
            row.home_page = pkg.home_page
            row.license_field = pkg.license_field
            row.classifiers = list(pkg.classifiers)
            self._sync_releases(row, pkg.releases)
        self.session.flush()
        return row

    def _sync_releases(self, row: Package, releases: Sequence[ReleaseRecord]) -> None:
        existing = {release.version: release for release in row.releases}
        wanted = {release.version for release in releases}

        for version, release_row in existing.items():
            if version not in wanted:
                row.releases.remove(release_row)

        for release in releases:
            release_row = existing.get(release.version)
            if release_row is None:
                release_row = Release(version=release.version)
                row.releases.append(release_row)
            elif _file_signature(release_row.files) == _file_signature(release.files):
                continue
            else:
                release_row.imports.clear()
                release_row.scan = None
                release_row.files.clear()
                self.session.flush()

            release_row.upload_time = to_naive_utc(release.upload_time)
            release_row.size_bytes = release.size_bytes
            for f in release.files:
                release_row.files.append(
                    ReleaseFile(
                        filename=f.filename,
                        package_type=f.package_type.value,
                        size_bytes=f.size_bytes,
                        upload_time=to_naive_utc(f.upload_time),
                        url=f.url,
                        sha256=f.sha256,
                    )
                )

    @staticmethod
    def to_record(row: Package) -> PackageRecord:
        releases = [
            ReleaseRecord(
                version=release.version,
                files=tuple(
                    DistFile(
                        filename=f.filename,
                        package_type=PackageType.parse(f.package_type),
                        size_bytes=f.size_bytes,
                        upload_time=to_aware_utc(f.upload_time),
                        url=f.url,
                        sha256=f.sha256,
                    )
                    for f in release.files
                ),
            )
            for release in row.releases
        ]
        return PackageRecord(
            name=row.name,
            raw_name=row.raw_name,
            author=row.author,
            maintainer=row.maintainer,
            home_page=row.home_page,
            license_field=row.license_field,
            classifiers=tuple(row.classifiers or ()),
            releases=tuple(releases),
            author_email=row.author_email,
            maintainer_email=row.maintainer_email,
            gone=row.gone,
        )


class ImportRepository:
    """Import occurrence rows and scan status."""

    def __init__(self, session: Session):
        self.session = session

    def replace(
        self,
        release: Release,
        items: Iterable[Union[FileExtraction, ImportStatement]],
        archive: Optional[str] = None,
    ) -> int:
        self.session.execute(delete(ImportRow).where(ImportRow.release_id == release.id))
        stage_counts: dict[str, int] = {}
        files = 0
        stored = 0
        for item in items:
            if isinstance(item, FileExtraction):
                files += 1
                stage_counts[item.stage.value] = stage_counts.get(item.stage.value, 0) + 1
                path, statements = item.path, item.statements
            else:
                path, statements = "", (item,)
            for stmt in statements:
                self.session.add(
                    ImportRow(
                        release_id=release.id,
                        file_path=path,
                        line=stmt.line,
                        column=stmt.column,
                        module=stmt.module,
                        names=[list(pair) for pair in stmt.names],
                        alias=stmt.alias,
                        relative_level=stmt.relative_level,
                        is_star=stmt.is_star,
                        stage=stmt.stage.value,
                    )
                )
                stored += 1

        self.mark(release, SCANNED, archive=archive, files=files, stage_counts=stage_counts)
        return stored

    def mark(
        self,
        release: Release,
        status: str,
        archive: Optional[str] = None,
        files: int = 0,
        stage_counts: Optional[dict] = None,
        error: Optional[str] = None,
    ) -> None:
        scan = self.session.get(ScanStatus, release.id)
        if scan is None:
            scan = ScanStatus(release_id=release.id)
            self.session.add(scan)
        scan.status = status
        scan.archive = archive
        scan.files_scanned = files
        scan.stage_counts = dict(sorted((stage_counts or {}).items()))
        scan.error = error
        self.session.flush()


@dataclass(frozen=True)
class PendingScan:
    """A release whose sdist has not been scanned yet."""

    release_id: int
    package: str
    version: str
    sdists: tuple[DistFile, ...]


class Views:
    """Named read-only queries with a fixed row order."""

    def __init__(self, session: Session):
        self.session = session

    def activity_feed(self, **_) -> Iterator[dict]:
        stmt = (
            select(Package.name, Package.author, Release.version, Release.upload_time)
            .join(Release, Release.package_id == Package.id)
            .where(Package.gone.is_(False), Release.upload_time.is_not(None))
            .order_by(Package.name, Release.upload_time, Release.version)
        )
        for name, author, version, upload in self.session.execute(stmt):
            yield {
                "package": name,
                "version": version,
                "year": upload.year,
                "upload_time": to_aware_utc(upload).isoformat(),
                "author": author,
            }

    def imports_with_year(self, top_level: Optional[str] = None, include_relative: bool = False, **_) -> Iterator[dict]:
        stmt = (
            select(
                Package.name,
                Release.version,
                Release.upload_time,
                ImportRow.file_path,
                ImportRow.line,
                ImportRow.column,
                ImportRow.module,
                ImportRow.relative_level,
                ImportRow.stage,
            )
            .join(Release, ImportRow.release_id == Release.id)
            .join(Package, Release.package_id == Package.id)
            .where(Package.gone.is_(False))
            .order_by(
                Package.name,
                Release.version,
                ImportRow.file_path,
                ImportRow.line,
                ImportRow.column,
                ImportRow.id,
            )
        )
        if not include_relative:
            stmt = stmt.where(ImportRow.relative_level == 0)
        for name, version, upload, path, line, column, module, level, stage in self.session.execute(stmt):
            if top_level is not None and module.split(".", 1)[0] != top_level:
                continue
            yield {
                "package": name,
                "version": version,
                "year": upload.year if upload else None,
                "file_path": path,
                "line": line,
                "column": column,
                "module": module,
                "relative_level": level,
                "stage": stage,
            }

    def license_assignments(self, **_) -> Iterator[dict]:
        stmt = (
            select(Package.name, LicenseRow)
            .join(LicenseRow, LicenseRow.package_id == Package.id)
            .where(Package.gone.is_(False))
            .order_by(Package.name)
        )
        for name, row in self.session.execute(stmt):
            yield {
                "package": name,
                "family": row.family,
                "name": row.name,
                "version": row.version,
                "source": row.source,
                "ambiguous": row.ambiguous,
            }

    def author_flags(self, **_) -> Iterator[dict]:
        stmt = (
            select(Package.name, AuthorFlag)
            .join(AuthorFlag, AuthorFlag.package_id == Package.id)
            .where(Package.gone.is_(False))
            .order_by(Package.name)
        )
        for name, row in self.session.execute(stmt):
            yield {
                "package": name,
                "raw": row.raw,
                "key": row.key,
                "is_multiple": row.is_multiple,
                "is_organization": row.is_organization,
            }

    def sizes(self, **_) -> Iterator[dict]:
        stmt = (
            select(Package.name, Release.version, Release.size_bytes)
            .join(Release, Release.package_id == Package.id)
            .where(Package.gone.is_(False))
            .order_by(Package.name, Release.version)
        )
        for name, version, size in self.session.execute(stmt):
            yield {"package": name, "version": version, "size_bytes": size}

    def release_files(self, **_) -> Iterator[dict]:
        stmt = (
            select(Package.name, Release.version, ReleaseFile)
            .join(Release, Release.package_id == Package.id)
            .join(ReleaseFile, ReleaseFile.release_id == Release.id)
            .order_by(Package.name, Release.version, ReleaseFile.filename)
        )
        for name, version, f in self.session.execute(stmt):
            yield {
                "package": name,
                "version": version,
                "filename": f.filename,
                "package_type": f.package_type,
                "size_bytes": f.size_bytes,
                "url": f.url,
                "sha256": f.sha256,
            }

    def packages(self, **_) -> Iterator[dict]:
        for row in self.session.execute(select(Package).order_by(Package.name)).scalars():
            yield {
                "package": row.name,
                "raw_name": row.raw_name,
                "author": row.author,
                "maintainer": row.maintainer,
                "home_page": row.home_page,
                "license_field": row.license_field,
                "releases": len(row.releases),
                "gone": row.gone,
            }


VIEW_CATALOG: tuple[str, ...] = (
    "activity_feed",
    "imports_with_year",
    "license_assignments",
    "author_flags",
    "sizes",
    "release_files",
    "packages",
)


class CensusStore:
    """Single-writer, many-reader access to the census database.

    Example:
        with CensusStore(path) as store:
            store.upsert_package(record)
            rows = list(store.query("imports_with_year"))
    """

    def __init__(self, path: Path):
        self.path = Path(path)
        self.engine = init_database(self.path)
        self._factory = get_session_factory(self.engine)
        self._write_lock = threading.Lock()

    def __enter__(self) -> "CensusStore":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def close(self) -> None:
        self.engine.dispose()

    def _write(self, action: Callable[[Session], Any]) -> Any:
        with self._write_lock:
            try:
                with get_session(self._factory) as session:
                    return action(session)
            except SQLAlchemyError as e:
                raise StoreError(f"store write failed: {e}") from e

    def _read(self, action: Callable[[Session], Any]) -> Any:
        with get_session(self._factory) as session:
            return action(session)

    # Writes

    def upsert_package(self, pkg: PackageRecord) -> int:
        """Store a package; idempotent on its canonical name. Returns its id."""
        return self._write(lambda s: PackageRepository(s).upsert(pkg).id)

    def record_imports(
        self,
        release_id: int,
        items: Iterable[Union[FileExtraction, ImportStatement]],
        archive: Optional[str] = None,
    ) -> int:
        """Replace a release's import rows and mark it scanned.

        Raises:
            ForeignKeyError: If the release does not exist.
        """
        items = list(items)

        def action(session: Session) -> int:
            release = session.get(Release, release_id)
            if release is None:
                raise ForeignKeyError(f"no release with id {release_id}")
            return ImportRepository(session).replace(release, items, archive=archive)

        return self._write(action)

    def record_scan_failure(self, release_id: int, error: str, archive: Optional[str] = None) -> None:
        def action(session: Session) -> None:
            release = session.get(Release, release_id)
            if release is None:
                raise ForeignKeyError(f"no release with id {release_id}")
            session.execute(delete(ImportRow).where(ImportRow.release_id == release_id))
            ImportRepository(session).mark(release, FAILED, archive=archive, error=error)

        self._write(action)

    def replace_index(self, entries: Sequence[tuple[str, Optional[str]]]) -> int:
        """Store the index listing as ``(raw_name, canonical_name)`` pairs."""

        def action(session: Session) -> int:
            session.execute(delete(IndexEntry))
            for position, (raw_name, name) in enumerate(entries):
                session.add(IndexEntry(position=position, raw_name=raw_name, name=name))
            return len(entries)

        return self._write(action)

    def set_license(self, name: str, assignment: LicenseAssignment, rule_version: str) -> None:
        def action(session: Session) -> None:
            package = PackageRepository(session).get_by_name(name)
            if package is None:
                raise ForeignKeyError(f"no package named {name!r}")
            package.license = LicenseRow(
                family=assignment.family.value,
                name=assignment.name,
                version=assignment.version,
                source=assignment.source.value,
                ambiguous=assignment.ambiguous,
                rule_version=rule_version,
            )

        self._write(action)

    def set_author_flag(self, name: str, record: Optional[AuthorRecord]) -> None:
        def action(session: Session) -> None:
            package = PackageRepository(session).get_by_name(name)
            if package is None:
                raise ForeignKeyError(f"no package named {name!r}")
            if record is None:
                package.author_flag = None
                return
            package.author_flag = AuthorFlag(
                raw=record.raw,
                key=record.key,
                is_multiple=record.is_multiple,
                is_organization=record.is_organization,
            )

        self._write(action)

    def snapshot(self, corpus_id: str, tool_versions: dict[str, str]) -> dict[str, int]:
        """Record table cardinalities and tool versions; returns the counts."""

        def action(session: Session) -> dict[str, int]:
            counts = self._counts(session)
            session.add(
                Snapshot(
                    corpus_id=corpus_id,
                    created_at=datetime.now(timezone.utc).replace(tzinfo=None),
                    counts=counts,
                    tool_versions=dict(sorted(tool_versions.items())),
                )
            )
            return counts

        return self._write(action)

    # Reads

    @staticmethod
    def _counts(session: Session) -> dict[str, int]:
        counts = {}
        for table in Base.metadata.sorted_tables:
            counts[table.name] = session.execute(select(func.count()).select_from(table)).scalar_one()
        return dict(sorted(counts.items()))

    def counts(self) -> dict[str, int]:
        return self._read(self._counts)

    def index_names(self) -> list[str]:
        """Canonical names from the stored index, deduplicated, in listing order."""

        def action(session: Session) -> list[str]:
            names = session.execute(
                select(IndexEntry.name).where(IndexEntry.name.is_not(None)).order_by(IndexEntry.position)
            ).scalars()
            return list(dict.fromkeys(names))

        return self._read(action)

    def package_names(self, include_gone: bool = False) -> list[str]:
        def action(session: Session) -> list[str]:
            stmt = select(Package.name).order_by(Package.name)
            if not include_gone:
                stmt = stmt.where(Package.gone.is_(False))
            return list(session.execute(stmt).scalars())

        return self._read(action)

    def load_packages(self, include_gone: bool = False) -> list[PackageRecord]:
        """Rebuild package records, ordered by name."""

        def action(session: Session) -> list[PackageRecord]:
            rows = PackageRepository(session).list_all()
            return [PackageRepository.to_record(r) for r in rows if include_gone or not r.gone]

        return self._read(action)

    def release_id(self, name: str, version: str) -> Optional[int]:
        def action(session: Session) -> Optional[int]:
            return session.execute(
                select(Release.id)
                .join(Package, Release.package_id == Package.id)
                .where(Package.name == name, Release.version == version)
            ).scalar_one_or_none()

        return self._read(action)

    def pending_scans(self, rescan: bool = False) -> list[PendingScan]:
        """Releases with an sdist and no scan status, ordered by package and version."""

        def action(session: Session) -> list[PendingScan]:
            stmt = (
                select(Release, Package.name)
                .join(Package, Release.package_id == Package.id)
                .where(Package.gone.is_(False))
                .order_by(Package.name, Release.version)
            )
            pending = []
            for release, name in session.execute(stmt):
                if release.scan is not None and not rescan:
                    continue
                sdists = tuple(
                    DistFile(
                        filename=f.filename,
                        package_type=PackageType.SDIST,
                        size_bytes=f.size_bytes,
                        upload_time=to_aware_utc(f.upload_time),
                        url=f.url,
                        sha256=f.sha256,
                    )
                    for f in release.files
                    if f.package_type == PackageType.SDIST.value
                )
                if sdists:
                    pending.append(PendingScan(release.id, name, release.version, sdists))
            return pending

        return self._read(action)

    def scan_summary(self) -> dict[str, int]:
        """Number of releases per scan status."""

        def action(session: Session) -> dict[str, int]:
            rows = session.execute(
                select(ScanStatus.status, func.count()).group_by(ScanStatus.status)
            ).all()
            return {status: count for status, count in sorted(rows)}

        return self._read(action)

    def query(self, view: str, params: Optional[dict] = None) -> Iterator[dict]:
        """Rows of a named view.

        Raises:
            CatalogError: If the view is not in the catalog.
        """
        if view not in VIEW_CATALOG:
            raise CatalogError(f"unknown view {view!r}; expected one of {', '.join(VIEW_CATALOG)}")
        params = params or {}
        # Materialized so the session can close before the caller iterates.
        rows = self._read(lambda s: list(getattr(Views(s), view)(**params)))
        return iter(rows)
