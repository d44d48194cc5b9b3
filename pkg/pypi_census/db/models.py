"""SQLAlchemy ORM models for the census store.

Timestamps are stored as naive UTC.
"""

from datetime import datetime
from typing import Optional

from sqlalchemy import (
    JSON,
    Boolean,
    DateTime,
    ForeignKey,
    Integer,
    String,
    Text,
    UniqueConstraint,
)
from sqlalchemy.orm import DeclarativeBase, Mapped, mapped_column, relationship


class Base(DeclarativeBase):
    """Base class for all models."""

    pass


class SchemaInfo(Base):
    """Key/value facts about the store itself, including its schema version."""

    __tablename__ = "schema_info"

    key: Mapped[str] = mapped_column(String(64), primary_key=True)
    value: Mapped[str] = mapped_column(String(255), nullable=False)


class IndexEntry(Base):
    """A project listed by the registry index, in listing order."""

    __tablename__ = "index_entries"

    position: Mapped[int] = mapped_column(Integer, primary_key=True)
    raw_name: Mapped[str] = mapped_column(String(255), nullable=False)
    name: Mapped[Optional[str]] = mapped_column(String(255), nullable=True, index=True)


class Package(Base):
    """A registry package with its metadata fields."""

    __tablename__ = "packages"

    id: Mapped[int] = mapped_column(Integer, primary_key=True, autoincrement=True)
    name: Mapped[str] = mapped_column(String(255), unique=True, nullable=False, index=True)
    raw_name: Mapped[str] = mapped_column(String(255), nullable=False)
    author: Mapped[Optional[str]] = mapped_column(Text, nullable=True)
    maintainer: Mapped[Optional[str]] = mapped_column(Text, nullable=True)
    author_email: Mapped[Optional[str]] = mapped_column(Text, nullable=True)
    maintainer_email: Mapped[Optional[str]] = mapped_column(Text, nullable=True)
    home_page: Mapped[Optional[str]] = mapped_column(Text, nullable=True)
    license_field: Mapped[Optional[str]] = mapped_column(Text, nullable=True)
    classifiers: Mapped[list] = mapped_column(JSON, default=list, nullable=False)
    gone: Mapped[bool] = mapped_column(Boolean, default=False, nullable=False)

    releases: Mapped[list["Release"]] = relationship(
        "Release",
        back_populates="package",
        cascade="all, delete-orphan",
        order_by="Release.id",
    )
    license: Mapped[Optional["LicenseRow"]] = relationship(
        "LicenseRow", cascade="all, delete-orphan", uselist=False
    )
    author_flag: Mapped[Optional["AuthorFlag"]] = relationship(
        "AuthorFlag", cascade="all, delete-orphan", uselist=False
    )

    def __repr__(self) -> str:
        return f"<Package(name={self.name!r}, releases={len(self.releases)})>"


class Release(Base):
    """One version of a package."""

    __tablename__ = "releases"
    __table_args__ = (UniqueConstraint("package_id", "version", name="uq_release_version"),)

    id: Mapped[int] = mapped_column(Integer, primary_key=True, autoincrement=True)
    package_id: Mapped[int] = mapped_column(
        Integer, ForeignKey("packages.id", ondelete="CASCADE"), nullable=False, index=True
    )
    version: Mapped[str] = mapped_column(String(255), nullable=False)
    upload_time: Mapped[Optional[datetime]] = mapped_column(DateTime, nullable=True)
    size_bytes: Mapped[int] = mapped_column(Integer, default=0, nullable=False)

    package: Mapped["Package"] = relationship("Package", back_populates="releases")
    files: Mapped[list["ReleaseFile"]] = relationship(
        "ReleaseFile",
        back_populates="release",
        cascade="all, delete-orphan",
        order_by="ReleaseFile.filename",
    )
    imports: Mapped[list["ImportRow"]] = relationship(
        "ImportRow", cascade="all, delete-orphan", order_by="ImportRow.id"
    )
    scan: Mapped[Optional["ScanStatus"]] = relationship(
        "ScanStatus", cascade="all, delete-orphan", uselist=False
    )

    def __repr__(self) -> str:
        return f"<Release(package_id={self.package_id}, version={self.version!r})>"


class ReleaseFile(Base):
    """A distribution file of a release."""

    __tablename__ = "dist_files"

    id: Mapped[int] = mapped_column(Integer, primary_key=True, autoincrement=True)
    release_id: Mapped[int] = mapped_column(
        Integer, ForeignKey("releases.id", ondelete="CASCADE"), nullable=False, index=True
    )
    filename: Mapped[str] = mapped_column(String(512), nullable=False)
    package_type: Mapped[str] = mapped_column(String(32), nullable=False)
    size_bytes: Mapped[int] = mapped_column(Integer, default=0, nullable=False)
    upload_time: Mapped[Optional[datetime]] = mapped_column(DateTime, nullable=True)
    url: Mapped[str] = mapped_column(Text, nullable=False, default="")
    sha256: Mapped[Optional[str]] = mapped_column(String(64), nullable=True)

    release: Mapped["Release"] = relationship("Release", back_populates="files")


class ImportRow(Base):
    """One import statement found in a release's source."""

    __tablename__ = "import_occurrences"

    id: Mapped[int] = mapped_column(Integer, primary_key=True, autoincrement=True)
    release_id: Mapped[int] = mapped_column(
        Integer, ForeignKey("releases.id", ondelete="CASCADE"), nullable=False, index=True
    )
    file_path: Mapped[str] = mapped_column(Text, nullable=False, default="")
    line: Mapped[int] = mapped_column(Integer, nullable=False)
    column: Mapped[int] = mapped_column(Integer, nullable=False, default=0)
    module: Mapped[str] = mapped_column(Text, nullable=False)
    names: Mapped[list] = mapped_column(JSON, default=list, nullable=False)
    alias: Mapped[Optional[str]] = mapped_column(String(255), nullable=True)
    relative_level: Mapped[int] = mapped_column(Integer, default=0, nullable=False)
    is_star: Mapped[bool] = mapped_column(Boolean, default=False, nullable=False)
    stage: Mapped[str] = mapped_column(String(32), nullable=False)


class ScanStatus(Base):
    """Outcome of scanning one release's sdist."""

    __tablename__ = "scan_status"

    release_id: Mapped[int] = mapped_column(
        Integer, ForeignKey("releases.id", ondelete="CASCADE"), primary_key=True
    )
    status: Mapped[str] = mapped_column(String(16), nullable=False)
    archive: Mapped[Optional[str]] = mapped_column(String(512), nullable=True)
    files_scanned: Mapped[int] = mapped_column(Integer, default=0, nullable=False)
    stage_counts: Mapped[dict] = mapped_column(JSON, default=dict, nullable=False)
    error: Mapped[Optional[str]] = mapped_column(Text, nullable=True)


class LicenseRow(Base):
    """Resolved license of a package."""

    __tablename__ = "license_assignments"

    package_id: Mapped[int] = mapped_column(
        Integer, ForeignKey("packages.id", ondelete="CASCADE"), primary_key=True
    )
    family: Mapped[str] = mapped_column(String(32), nullable=False)
    name: Mapped[str] = mapped_column(String(64), nullable=False)
    version: Mapped[str] = mapped_column(String(32), nullable=False)
    source: Mapped[str] = mapped_column(String(32), nullable=False)
    ambiguous: Mapped[bool] = mapped_column(Boolean, default=False, nullable=False)
    rule_version: Mapped[str] = mapped_column(String(64), nullable=False)


class AuthorFlag(Base):
    """Author string classification of a package."""

    __tablename__ = "author_flags"

    package_id: Mapped[int] = mapped_column(
        Integer, ForeignKey("packages.id", ondelete="CASCADE"), primary_key=True
    )
    raw: Mapped[str] = mapped_column(Text, nullable=False)
    key: Mapped[str] = mapped_column(Text, nullable=False, index=True)
    is_multiple: Mapped[bool] = mapped_column(Boolean, nullable=False)
    is_organization: Mapped[bool] = mapped_column(Boolean, nullable=False)


class Snapshot(Base):
    """Row counts and tool versions recorded at the end of a run."""

    __tablename__ = "corpus_snapshots"

    id: Mapped[int] = mapped_column(Integer, primary_key=True, autoincrement=True)
    corpus_id: Mapped[str] = mapped_column(String(64), nullable=False, index=True)
    created_at: Mapped[datetime] = mapped_column(DateTime, nullable=False)
    counts: Mapped[dict] = mapped_column(JSON, default=dict, nullable=False)
    tool_versions: Mapped[dict] = mapped_column(JSON, default=dict, nullable=False)
